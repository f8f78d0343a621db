#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rsnpe/common.hpp"
#include "rsnpe/datagen.hpp"
#include "rsnpe/flow.hpp"

namespace rsnpe::inference {

using datagen::PriorSpec;
using simulator::TerrainParams;

/// Observed peak powers (dB) plus the geometry and reference assumption that
/// turn them into the conditioner value h.
struct Observation {
    Real p_obs_db = 0.0;
    Real p_ref_obs_db = 0.0;
    Real r_obs_km = 300.0;
    Real r_ref_obs_km = 300.0;
    Real eps_ref_assumed = 3.0;
    int altitude_exponent = +1;  ///< sign of the (r/r_ref) correction exponent

    void validate() const;
};

struct DimensionSummary {
    Real mean = 0.0;
    Real stddev = 0.0;
    Real q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
};

struct PosteriorResult {
    std::vector<TerrainParams> samples;
    Real eps_ref_used = 0.0;
    Real h_used = 0.0;
    Real ctx_std_used = 0.0;
    bool extrapolation = false;  ///< log h beyond +-6 training standard deviations
    Real support_violation_frac = 0.0;
    std::array<DimensionSummary, 3> summary;
    std::array<std::array<Real, 3>, 3> correlation{};
};

DimensionSummary summarize(const std::vector<Real>& values);

/// Linear-interpolation order statistic at quantile q in [0, 1].
Real quantile(std::vector<Real> values, Real q);

/// Amortized posterior inference: dB to linear, altitude-rescale the
/// reference, form h, sample the flow. Never calls the simulator. `prior`
/// is used only for the soft support check (box expanded by 5%).
PosteriorResult infer(const flow::FlowModel& model, const Observation& obs, std::size_t n,
                      uint64_t seed, const PriorSpec& prior);

/// One inference per assumed reference permittivity, all sharing the same
/// base-noise seed so posterior differences reflect conditioning only.
std::vector<PosteriorResult> eps_ref_sweep(const flow::FlowModel& model, const Observation& obs,
                                           const std::vector<Real>& eps_values, std::size_t n,
                                           uint64_t seed, const PriorSpec& prior);

}  // namespace rsnpe::inference
