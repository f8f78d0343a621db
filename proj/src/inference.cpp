#include "rsnpe/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsnpe/physics.hpp"

namespace rsnpe::inference {

void Observation::validate() const {
    if (!(r_obs_km > 0.0)) throw ConfigError("observation.r_obs_km: must be > 0");
    if (!(r_ref_obs_km > 0.0)) throw ConfigError("observation.r_ref_obs_km: must be > 0");
    if (!(eps_ref_assumed >= 1.0)) throw ConfigError("observation.eps_ref: must be >= 1");
    if (!std::isfinite(p_obs_db) || !std::isfinite(p_ref_obs_db)) {
        throw ConfigError("observation: powers must be finite dB values");
    }
}

Real quantile(std::vector<Real> values, Real q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const Real pos = q * static_cast<Real>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const Real frac = pos - static_cast<Real>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

DimensionSummary summarize(const std::vector<Real>& values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty sample");
    DimensionSummary s;
    Real sum = 0.0;
    for (const Real v : values) sum += v;
    s.mean = sum / static_cast<Real>(values.size());
    Real sq = 0.0;
    for (const Real v : values) {
        const Real d = v - s.mean;
        sq += d * d;
    }
    s.stddev = std::sqrt(sq / static_cast<Real>(values.size()));
    s.q05 = quantile(values, 0.05);
    s.q25 = quantile(values, 0.25);
    s.q50 = quantile(values, 0.50);
    s.q75 = quantile(values, 0.75);
    s.q95 = quantile(values, 0.95);
    return s;
}

PosteriorResult infer(const flow::FlowModel& model, const Observation& obs, std::size_t n,
                      uint64_t seed, const PriorSpec& prior) {
    obs.validate();
    prior.validate();
    if (n < 1) throw std::invalid_argument("infer: n must be >= 1");

    const Real p = physics::db_to_linear(obs.p_obs_db);
    Real p_ref = physics::db_to_linear(obs.p_ref_obs_db);
    p_ref = physics::altitude_rescale(p_ref, obs.r_ref_obs_km, obs.r_obs_km,
                                      obs.altitude_exponent);
    const Real h = physics::compute_h(p, p_ref, obs.eps_ref_assumed);

    PosteriorResult result;
    result.eps_ref_used = obs.eps_ref_assumed;
    result.h_used = h;
    result.ctx_std_used = flow::standardize_context(model, h);
    result.extrapolation = std::abs(result.ctx_std_used) > 6.0;
    result.samples = flow::flow_sample(model, h, n, seed);

    // Soft support check against the prior box widened by 5% per dimension.
    const Real eps_pad = 0.05 * (prior.eps_hi - prior.eps_lo);
    const Real sig_pad = 0.05 * (prior.sigma_hi - prior.sigma_lo);
    const Real slo_pad = 0.05 * (prior.slope_hi - prior.slope_lo);
    std::size_t violations = 0;
    for (const auto& s : result.samples) {
        const bool inside = s.eps >= prior.eps_lo - eps_pad && s.eps <= prior.eps_hi + eps_pad &&
                            s.sigma >= prior.sigma_lo - sig_pad &&
                            s.sigma <= prior.sigma_hi + sig_pad &&
                            s.slope >= prior.slope_lo - slo_pad &&
                            s.slope <= prior.slope_hi + slo_pad;
        if (!inside) ++violations;
    }
    result.support_violation_frac =
        static_cast<Real>(violations) / static_cast<Real>(result.samples.size());

    std::array<std::vector<Real>, 3> columns;
    for (auto& c : columns) c.reserve(n);
    for (const auto& s : result.samples) {
        columns[0].push_back(s.eps);
        columns[1].push_back(s.sigma);
        columns[2].push_back(s.slope);
    }
    for (int d = 0; d < 3; ++d) result.summary[d] = summarize(columns[d]);

    // Sample correlation matrix exposes the (eps, sigma) trade-off.
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (a == b) {
                result.correlation[a][b] = 1.0;
                continue;
            }
            Real cov = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cov += (columns[a][i] - result.summary[a].mean) *
                       (columns[b][i] - result.summary[b].mean);
            }
            cov /= static_cast<Real>(n);
            const Real denom = result.summary[a].stddev * result.summary[b].stddev;
            result.correlation[a][b] = denom > 0.0 ? cov / denom : 0.0;
        }
    }
    return result;
}

std::vector<PosteriorResult> eps_ref_sweep(const flow::FlowModel& model, const Observation& obs,
                                           const std::vector<Real>& eps_values, std::size_t n,
                                           uint64_t seed, const PriorSpec& prior) {
    if (eps_values.empty()) throw std::invalid_argument("eps_ref_sweep: empty sweep list");
    std::vector<PosteriorResult> out;
    out.reserve(eps_values.size());
    for (const Real e : eps_values) {
        Observation o = obs;
        o.eps_ref_assumed = e;
        out.push_back(infer(model, o, n, seed, prior));
    }
    return out;
}

}  // namespace rsnpe::inference
