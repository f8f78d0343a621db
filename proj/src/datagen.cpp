#include "rsnpe/datagen.hpp"

#include <stdexcept>
#include <string>
#include <unordered_map>

#include "rsnpe/physics.hpp"

namespace rsnpe::datagen {

void PriorSpec::validate() const {
    if (!(eps_lo >= 1.0)) throw ConfigError("prior.eps_lo: must be >= 1");
    if (!(eps_lo <= eps_hi)) throw ConfigError("prior.eps: lo must be <= hi");
    if (!(sigma_lo <= sigma_hi)) throw ConfigError("prior.sigma: lo must be <= hi");
    if (!(sigma_lo >= 0.0)) throw ConfigError("prior.sigma_lo: must be >= 0");
    if (!(slope_lo <= slope_hi)) throw ConfigError("prior.slope: lo must be <= hi");
    if (!(slope_lo >= 0.0)) throw ConfigError("prior.slope_lo: must be >= 0");
    if (!(eps_ref_lo >= 1.0)) throw ConfigError("prior.eps_ref_lo: must be >= 1");
    if (!(eps_ref_lo <= eps_ref_hi)) throw ConfigError("prior.eps_ref: lo must be <= hi");
}

std::vector<TerrainParams> sample_prior(std::size_t n, const PriorSpec& spec, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_prior: n must be >= 1");
    spec.validate();
    std::vector<TerrainParams> out(n);
    Rng rng(derive_seed(seed, 0x9a10ULL));
    for (auto& t : out) {
        t.eps = rng.uniform(spec.eps_lo, spec.eps_hi);
        t.sigma = rng.uniform(spec.sigma_lo, spec.sigma_hi);
        t.slope = rng.uniform(spec.slope_lo, spec.slope_hi);
    }
    return out;
}

std::vector<PrimaryRecord> generate_primary(std::size_t n, const PriorSpec& spec,
                                            const RadarConfig& cfg, uint64_t seed) {
    const std::vector<TerrainParams> thetas = sample_prior(n, spec, seed);
    std::vector<PrimaryRecord> out(n);
    parallel_chunks(n, 16, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
            const uint64_t rec_seed = derive_seed(seed, 0x7000000ULL + i);
            try {
                const auto line = simulator::simulate_rangeline(thetas[i], cfg, rec_seed);
                out[i] = PrimaryRecord{thetas[i], simulator::peak_power(line), rec_seed};
            } catch (const std::exception& ex) {
                throw std::runtime_error("generate_primary: record " + std::to_string(i) + ": " +
                                         ex.what());
            }
        }
    });
    return out;
}

std::vector<RefRecord> generate_reference(std::size_t n, const PriorSpec& spec,
                                          const RadarConfig& cfg, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_reference: n must be >= 1");
    spec.validate();
    std::vector<Real> eps_ref(n);
    Rng rng(derive_seed(seed, 0xca11ULL));
    for (auto& e : eps_ref) e = rng.uniform(spec.eps_ref_lo, spec.eps_ref_hi);

    std::vector<RefRecord> out(n);
    parallel_chunks(n, 16, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
            const uint64_t rec_seed = derive_seed(seed, 0x8000000ULL + i);
            TerrainParams flat{eps_ref[i], 0.0, 0.0};
            try {
                const auto line = simulator::simulate_rangeline(flat, cfg, rec_seed);
                out[i] = RefRecord{eps_ref[i], simulator::peak_power(line), rec_seed};
            } catch (const std::exception& ex) {
                throw std::runtime_error("generate_reference: record " + std::to_string(i) +
                                         ": " + ex.what());
            }
        }
    });
    return out;
}

std::pair<std::vector<TrainSample>, std::vector<TrainSample>> build_pairs(
    const std::vector<PrimaryRecord>& primary, const std::vector<RefRecord>& reference,
    std::size_t n_train, std::size_t n_val, uint64_t seed) {
    const std::size_t np = primary.size();
    const std::size_t nr = reference.size();
    const std::size_t product = np * nr;
    const std::size_t m = n_train + n_val;
    if (np == 0 || nr == 0) throw std::invalid_argument("build_pairs: empty input dataset");
    if (m > product) {
        throw std::invalid_argument("build_pairs: requested " + std::to_string(m) +
                                    " pairs but the Cartesian product only has " +
                                    std::to_string(product));
    }

    // Partial Fisher-Yates over the linearized product, tracked sparsely so
    // memory stays O(n_train + n_val) even for orbital-scale products.
    Rng rng(derive_seed(seed, 0xfa12ULL));
    std::unordered_map<std::size_t, std::size_t> moved;
    moved.reserve(2 * m);
    auto slot = [&](std::size_t i) {
        const auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
    };
    std::vector<std::size_t> picks(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(product - i));
        const std::size_t val_j = slot(j);
        const std::size_t val_i = slot(i);
        picks[i] = val_j;
        moved[j] = val_i;
    }

    auto make_sample = [&](std::size_t linear) {
        const std::size_t pi = linear / nr;
        const std::size_t rj = linear % nr;
        const Real h =
            physics::compute_h(primary[pi].p, reference[rj].p_ref, reference[rj].eps_ref);
        return TrainSample{primary[pi].theta, h};
    };

    std::vector<TrainSample> train, val;
    train.reserve(n_train);
    val.reserve(n_val);
    for (std::size_t i = 0; i < n_train; ++i) train.push_back(make_sample(picks[i]));
    for (std::size_t i = n_train; i < m; ++i) val.push_back(make_sample(picks[i]));
    return {std::move(train), std::move(val)};
}

}  // namespace rsnpe::datagen
