#include "rsnpe/mlp.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rsnpe::mlp {

BinaryClassifier::BinaryClassifier(int input_dim, int hidden_units, uint64_t seed)
    : in_(input_dim), hidden_(hidden_units) {
    if (input_dim < 1 || hidden_units < 1) {
        throw std::invalid_argument("BinaryClassifier: dimensions must be >= 1");
    }
    w1_.resize(static_cast<std::size_t>(hidden_) * in_);
    b1_.assign(hidden_, 0.0);
    w2_.resize(hidden_);
    b2_ = 0.0;
    Rng rng(derive_seed(seed, 0xc1a5ULL));
    const Real bound1 = std::sqrt(6.0 / (in_ + hidden_));
    for (auto& w : w1_) w = rng.uniform(-bound1, bound1);
    const Real bound2 = std::sqrt(6.0 / (hidden_ + 1));
    for (auto& w : w2_) w = rng.uniform(-bound2, bound2);
}

Real BinaryClassifier::predict(const std::vector<Real>& x) const {
    Real z = b2_;
    for (int u = 0; u < hidden_; ++u) {
        Real a = b1_[u];
        const Real* row = w1_.data() + static_cast<std::size_t>(u) * in_;
        for (int i = 0; i < in_; ++i) a += row[i] * x[i];
        if (a > 0.0) z += w2_[u] * a;
    }
    return 1.0 / (1.0 + std::exp(-z));
}

void BinaryClassifier::train(const std::vector<std::vector<Real>>& x,
                             const std::vector<int>& labels, int epochs, int batch_size,
                             Real learning_rate, uint64_t seed) {
    if (x.size() != labels.size() || x.empty()) {
        throw std::invalid_argument("BinaryClassifier::train: mismatched or empty data");
    }
    const std::size_t n = x.size();
    const std::size_t np = w1_.size() + b1_.size() + w2_.size() + 1;
    std::vector<Real> m(np, 0.0), v(np, 0.0), grad(np, 0.0);
    const Real beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t step = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Real> a1(hidden_), h1(hidden_);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        Rng rng(derive_seed(seed, 0xb00ULL + static_cast<uint64_t>(epoch)));
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t stop = std::min(n, start + batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t bi = start; bi < stop; ++bi) {
                const auto& xi = x[order[bi]];
                const Real yi = static_cast<Real>(labels[order[bi]]);
                Real z = b2_;
                for (int u = 0; u < hidden_; ++u) {
                    Real a = b1_[u];
                    const Real* row = w1_.data() + static_cast<std::size_t>(u) * in_;
                    for (int i = 0; i < in_; ++i) a += row[i] * xi[i];
                    a1[u] = a;
                    h1[u] = a > 0.0 ? a : 0.0;
                    z += w2_[u] * h1[u];
                }
                const Real p = 1.0 / (1.0 + std::exp(-z));
                const Real gz = p - yi;  // d(BCE)/dz
                Real* g = grad.data();
                for (int u = 0; u < hidden_; ++u) {
                    const Real gh = gz * w2_[u];
                    const Real ga = a1[u] > 0.0 ? gh : 0.0;
                    if (ga != 0.0) {
                        Real* wrow = g + static_cast<std::size_t>(u) * in_;
                        for (int i = 0; i < in_; ++i) wrow[i] += ga * xi[i];
                        g[w1_.size() + u] += ga;
                    }
                    g[w1_.size() + b1_.size() + u] += gz * h1[u];
                }
                g[np - 1] += gz;
            }
            const Real inv = 1.0 / static_cast<Real>(stop - start);
            for (auto& gg : grad) gg *= inv;

            ++step;
            const Real bc1 = 1.0 - std::pow(beta1, static_cast<Real>(step));
            const Real bc2 = 1.0 - std::pow(beta2, static_cast<Real>(step));
            auto update = [&](Real& w, std::size_t idx) {
                m[idx] = beta1 * m[idx] + (1.0 - beta1) * grad[idx];
                v[idx] = beta2 * v[idx] + (1.0 - beta2) * grad[idx] * grad[idx];
                w -= learning_rate * (m[idx] / bc1) / (std::sqrt(v[idx] / bc2) + eps);
            };
            std::size_t idx = 0;
            for (auto& w : w1_) update(w, idx++);
            for (auto& w : b1_) update(w, idx++);
            for (auto& w : w2_) update(w, idx++);
            update(b2_, idx);
        }
    }
}

}  // namespace rsnpe::mlp
