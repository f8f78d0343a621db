#pragma once

#include <cstdint>
#include <vector>

#include "rsnpe/common.hpp"

namespace rsnpe::mlp {

/// One-hidden-layer binary classifier (ReLU hidden, sigmoid output) trained
/// with Adam on binary cross-entropy. Deterministic given the seeds, so
/// two-sample test accuracies are reproducible.
class BinaryClassifier {
public:
    BinaryClassifier(int input_dim, int hidden_units, uint64_t seed);

    void train(const std::vector<std::vector<Real>>& x, const std::vector<int>& labels,
               int epochs, int batch_size, Real learning_rate, uint64_t seed);

    /// P(label == 1 | x)
    Real predict(const std::vector<Real>& x) const;

private:
    int in_, hidden_;
    std::vector<Real> w1_, b1_, w2_;
    Real b2_;
};

}  // namespace rsnpe::mlp
