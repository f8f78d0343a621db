#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rsnpe/common.hpp"
#include "rsnpe/simulator.hpp"

namespace rsnpe::datagen {

using simulator::RadarConfig;
using simulator::TerrainParams;

/// Uniform prior box over (eps, sigma, slope) plus the reference-permittivity
/// range used for flat reference surfaces.
struct PriorSpec {
    Real eps_lo = 2.0, eps_hi = 12.0;
    Real sigma_lo = 0.0, sigma_hi = 5.0;
    Real slope_lo = 0.0, slope_hi = 0.5;
    Real eps_ref_lo = 2.0, eps_ref_hi = 4.0;

    void validate() const;
    bool contains(const TerrainParams& t) const {
        return t.eps >= eps_lo && t.eps <= eps_hi && t.sigma >= sigma_lo && t.sigma <= sigma_hi &&
               t.slope >= slope_lo && t.slope <= slope_hi;
    }
};

struct PrimaryRecord {
    TerrainParams theta;
    Real p = 0.0;  ///< peak power, linear
    uint64_t seed = 0;
};

struct RefRecord {
    Real eps_ref = 1.0;
    Real p_ref = 0.0;  ///< flat-plate peak power, linear
    uint64_t seed = 0;
};

/// One (theta, h) pair feeding the density estimator.
struct TrainSample {
    TerrainParams theta;
    Real h = 0.0;
};

std::vector<TerrainParams> sample_prior(std::size_t n, const PriorSpec& spec, uint64_t seed);

/// Simulates one rangeline per prior draw; record i uses an independent seed
/// derived from (seed, i) so regeneration is reproducible record by record.
std::vector<PrimaryRecord> generate_primary(std::size_t n, const PriorSpec& spec,
                                            const RadarConfig& cfg, uint64_t seed);

/// Flat plates (sigma = slope = 0) with eps_ref ~ U[eps_ref_lo, eps_ref_hi].
std::vector<RefRecord> generate_reference(std::size_t n, const PriorSpec& spec,
                                          const RadarConfig& cfg, uint64_t seed);

/// Draws n_train + n_val distinct index pairs from primary x reference without
/// replacement, computing h for each. Train and validation are disjoint.
std::pair<std::vector<TrainSample>, std::vector<TrainSample>> build_pairs(
    const std::vector<PrimaryRecord>& primary, const std::vector<RefRecord>& reference,
    std::size_t n_train, std::size_t n_val, uint64_t seed);

}  // namespace rsnpe::datagen
