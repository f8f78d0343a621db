#include "rsnpe/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsnpe/mlp.hpp"

namespace rsnpe::calibration {

PosteriorSampler make_flow_sampler(const flow::FlowModel& model) {
    return [model](Real h, std::size_t n, uint64_t seed) {
        return flow::flow_sample(model, h, n, seed);
    };
}

std::array<RankRecord, 3> sbc_ranks(const PosteriorSampler& sampler,
                                    const std::vector<TrainSample>& test_set, int L,
                                    uint64_t seed) {
    if (test_set.empty()) throw std::invalid_argument("sbc_ranks: empty test set");
    if (L < 1) throw std::invalid_argument("sbc_ranks: L must be >= 1");

    std::array<RankRecord, 3> records;
    for (auto& r : records) {
        r.L = L;
        r.ranks.resize(test_set.size());
    }

    Rng coin(derive_seed(seed, 0xc01dULL));
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const auto samples =
            sampler(test_set[i].h, static_cast<std::size_t>(L), derive_seed(seed, i));
        const std::array<Real, 3> truth{test_set[i].theta.eps, test_set[i].theta.sigma,
                                        test_set[i].theta.slope};
        for (int d = 0; d < 3; ++d) {
            int below = 0;
            for (const auto& s : samples) {
                const Real v = d == 0 ? s.eps : (d == 1 ? s.sigma : s.slope);
                if (v < truth[d]) {
                    ++below;
                } else if (v == truth[d] && coin.uniform01() < 0.5) {
                    ++below;
                }
            }
            records[d].ranks[i] = below;
        }
    }
    return records;
}

Real ks_statistic_uniform(std::vector<Real> values) {
    if (values.empty()) throw std::invalid_argument("ks_statistic_uniform: empty sample");
    std::sort(values.begin(), values.end());
    const Real n = static_cast<Real>(values.size());
    Real d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Real cdf = std::clamp(values[i], 0.0, 1.0);
        const Real lo = static_cast<Real>(i) / n;
        const Real hi = static_cast<Real>(i + 1) / n;
        d = std::max(d, std::max(hi - cdf, cdf - lo));
    }
    return d;
}

Real ks_pvalue(Real d, std::size_t n) {
    const Real lambda = std::sqrt(static_cast<Real>(n)) * d;
    if (lambda < 1e-3) return 1.0;
    Real sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const Real term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

Real ks_uniformity(const RankRecord& ranks, uint64_t seed) {
    if (ranks.ranks.size() < 20) {
        throw std::invalid_argument("ks_uniformity: need at least 20 ranks");
    }
    Rng rng(derive_seed(seed, 0x2b2bULL));
    std::vector<Real> u(ranks.ranks.size());
    const Real invL = 1.0 / static_cast<Real>(ranks.L);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = (static_cast<Real>(ranks.ranks[i]) + rng.uniform01()) * invL;
    }
    return ks_pvalue(ks_statistic_uniform(std::move(u)), ranks.ranks.size());
}

namespace {

struct FoldStats {
    std::vector<Real> mean, std;
};

FoldStats feature_stats(const std::vector<std::vector<Real>>& x,
                        const std::vector<std::size_t>& idx) {
    const std::size_t dim = x[0].size();
    FoldStats st;
    st.mean.assign(dim, 0.0);
    st.std.assign(dim, 0.0);
    for (const auto i : idx) {
        for (std::size_t d = 0; d < dim; ++d) st.mean[d] += x[i][d];
    }
    for (std::size_t d = 0; d < dim; ++d) st.mean[d] /= static_cast<Real>(idx.size());
    for (const auto i : idx) {
        for (std::size_t d = 0; d < dim; ++d) {
            const Real diff = x[i][d] - st.mean[d];
            st.std[d] += diff * diff;
        }
    }
    for (std::size_t d = 0; d < dim; ++d) {
        st.std[d] = std::sqrt(st.std[d] / static_cast<Real>(idx.size()));
        if (st.std[d] < 1e-12) st.std[d] = 1.0;
    }
    return st;
}

}  // namespace

Real c2st(const std::vector<std::vector<Real>>& samples_a,
          const std::vector<std::vector<Real>>& samples_b, uint64_t seed) {
    if (samples_a.empty() || samples_b.empty()) {
        throw std::invalid_argument("c2st: both sample sets must be nonempty");
    }
    if (samples_a[0].size() != samples_b[0].size()) {
        throw std::invalid_argument("c2st: dimension mismatch between sample sets");
    }
    const std::size_t dim = samples_a[0].size();

    std::vector<std::vector<Real>> x;
    std::vector<int> y;
    x.reserve(samples_a.size() + samples_b.size());
    for (const auto& s : samples_a) {
        x.push_back(s);
        y.push_back(0);
    }
    for (const auto& s : samples_b) {
        x.push_back(s);
        y.push_back(1);
    }

    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0xf01dULL));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    constexpr int kFolds = 5;
    constexpr int kHidden = 32;
    constexpr int kEpochs = 60;
    constexpr int kBatch = 128;
    constexpr Real kLr = 3e-3;

    Real accuracy_sum = 0.0;
    for (int fold = 0; fold < kFolds; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<int>(i % kFolds) == fold) {
                test_idx.push_back(order[i]);
            } else {
                train_idx.push_back(order[i]);
            }
        }
        const FoldStats st = feature_stats(x, train_idx);
        auto zscore = [&](const std::vector<Real>& v) {
            std::vector<Real> out(dim);
            for (std::size_t d = 0; d < dim; ++d) out[d] = (v[d] - st.mean[d]) / st.std[d];
            return out;
        };

        std::vector<std::vector<Real>> xt;
        std::vector<int> yt;
        xt.reserve(train_idx.size());
        for (const auto i : train_idx) {
            xt.push_back(zscore(x[i]));
            yt.push_back(y[i]);
        }
        mlp::BinaryClassifier clf(static_cast<int>(dim), kHidden,
                                  derive_seed(seed, 0x100 + fold));
        clf.train(xt, yt, kEpochs, kBatch, kLr, derive_seed(seed, 0x200 + fold));

        std::size_t correct = 0;
        for (const auto i : test_idx) {
            const int pred = clf.predict(zscore(x[i])) >= 0.5 ? 1 : 0;
            if (pred == y[i]) ++correct;
        }
        accuracy_sum += static_cast<Real>(correct) / static_cast<Real>(test_idx.size());
    }
    return accuracy_sum / kFolds;
}

std::array<Real, 3> c2st_ranks(const std::array<RankRecord, 3>& ranks, uint64_t seed) {
    std::array<Real, 3> out{};
    for (int d = 0; d < 3; ++d) {
        const auto& rec = ranks[d];
        Rng rng(derive_seed(seed, 0x3100ULL + d));
        std::vector<std::vector<Real>> a(rec.ranks.size()), b(rec.ranks.size());
        const Real invL = 1.0 / static_cast<Real>(rec.L);
        for (std::size_t i = 0; i < rec.ranks.size(); ++i) {
            a[i] = {(static_cast<Real>(rec.ranks[i]) + rng.uniform01()) * invL};
        }
        for (std::size_t i = 0; i < rec.ranks.size(); ++i) b[i] = {rng.uniform01()};
        out[d] = c2st(a, b, derive_seed(seed, 0x3200ULL + d));
    }
    return out;
}

std::array<Real, 3> c2st_dap(const PosteriorSampler& sampler,
                             const std::vector<TrainSample>& test_set, int L,
                             const PriorSpec& prior, uint64_t seed) {
    if (test_set.empty()) throw std::invalid_argument("c2st_dap: empty test set");
    if (L < 1) throw std::invalid_argument("c2st_dap: L must be >= 1");
    prior.validate();

    const std::size_t total = test_set.size() * static_cast<std::size_t>(L);
    std::array<std::vector<std::vector<Real>>, 3> pooled;
    for (auto& p : pooled) p.reserve(total);
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const auto samples =
            sampler(test_set[i].h, static_cast<std::size_t>(L), derive_seed(seed, 0x4000ULL + i));
        for (const auto& s : samples) {
            pooled[0].push_back({s.eps});
            pooled[1].push_back({s.sigma});
            pooled[2].push_back({s.slope});
        }
    }

    Rng rng(derive_seed(seed, 0x4242ULL));
    std::array<std::pair<Real, Real>, 3> box{std::pair<Real, Real>{prior.eps_lo, prior.eps_hi},
                                             {prior.sigma_lo, prior.sigma_hi},
                                             {prior.slope_lo, prior.slope_hi}};
    std::array<Real, 3> out{};
    for (int d = 0; d < 3; ++d) {
        std::vector<std::vector<Real>> prior_draws(total);
        for (auto& v : prior_draws) v = {rng.uniform(box[d].first, box[d].second)};
        out[d] = c2st(pooled[d], prior_draws, derive_seed(seed, 0x4300ULL + d));
    }
    return out;
}

CalibrationReport calibrate(const PosteriorSampler& sampler,
                            const std::vector<TrainSample>& test_set, int L,
                            const PriorSpec& prior, uint64_t seed) {
    CalibrationReport report;
    report.L = L;
    report.n_test = test_set.size();
    report.ranks = sbc_ranks(sampler, test_set, L, derive_seed(seed, 1));
    for (int d = 0; d < 3; ++d) {
        report.ks_p[d] = ks_uniformity(report.ranks[d], derive_seed(seed, 0x500ULL + d));
    }
    report.c2st_rank = c2st_ranks(report.ranks, derive_seed(seed, 2));
    report.c2st_dap = c2st_dap(sampler, test_set, L, prior, derive_seed(seed, 3));
    return report;
}

}  // namespace rsnpe::calibration
