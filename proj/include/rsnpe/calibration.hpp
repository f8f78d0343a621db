#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "rsnpe/common.hpp"
#include "rsnpe/datagen.hpp"
#include "rsnpe/flow.hpp"

namespace rsnpe::calibration {

using datagen::PriorSpec;
using datagen::TrainSample;
using simulator::TerrainParams;

/// Anything that draws posterior samples for a conditioner value h. Wrapping
/// the flow behind this signature lets the diagnostics run against reference
/// samplers (exact prior, degenerate point mass) in tests.
using PosteriorSampler =
    std::function<std::vector<TerrainParams>(Real h, std::size_t n, uint64_t seed)>;

PosteriorSampler make_flow_sampler(const flow::FlowModel& model);

/// Ranks of one theta dimension's ground truths under posterior samples;
/// each rank lies in [0, L].
struct RankRecord {
    std::vector<int> ranks;
    int L = 0;
};

/// Rank of ground-truth parameters under L posterior samples per test point,
/// one record per theta dimension. Ties count with probability 1/2 through a
/// seeded coin, which keeps the statistic exact for degenerate samplers.
std::array<RankRecord, 3> sbc_ranks(const PosteriorSampler& sampler,
                                    const std::vector<TrainSample>& test_set, int L,
                                    uint64_t seed);

/// Two-sided one-sample KS statistic of `values` against U[0,1].
Real ks_statistic_uniform(std::vector<Real> values);

/// Asymptotic Kolmogorov p-value for statistic d on n observations.
Real ks_pvalue(Real d, std::size_t n);

/// KS uniformity p-value of a rank record; ranks are jittered to continuous
/// values via (rank + U[0,1)) / L before the test.
Real ks_uniformity(const RankRecord& ranks, uint64_t seed = 0x5eedULL);

/// Classifier two-sample test: 5-fold cross-validated held-out accuracy of a
/// 32-unit one-hidden-layer classifier separating sample sets a (label 0) and
/// b (label 1), features z-scored with training-fold statistics. 0.5 means
/// indistinguishable.
Real c2st(const std::vector<std::vector<Real>>& samples_a,
          const std::vector<std::vector<Real>>& samples_b, uint64_t seed);

/// Rank-vs-uniform C2ST per dimension: jittered normalized ranks against an
/// equal count of fresh U[0,1] draws.
std::array<Real, 3> c2st_ranks(const std::array<RankRecord, 3>& ranks, uint64_t seed);

/// Data-averaged-posterior-vs-prior C2ST per dimension: posterior samples
/// pooled over all test points against fresh prior draws.
std::array<Real, 3> c2st_dap(const PosteriorSampler& sampler,
                             const std::vector<TrainSample>& test_set, int L,
                             const PriorSpec& prior, uint64_t seed);

struct CalibrationReport {
    std::array<Real, 3> ks_p{};
    std::array<Real, 3> c2st_rank{};
    std::array<Real, 3> c2st_dap{};
    std::array<RankRecord, 3> ranks;
    int L = 0;
    std::size_t n_test = 0;
};

CalibrationReport calibrate(const PosteriorSampler& sampler,
                            const std::vector<TrainSample>& test_set, int L,
                            const PriorSpec& prior, uint64_t seed);

}  // namespace rsnpe::calibration
