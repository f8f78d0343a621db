#include <doctest.h>

#include <cmath>

#include "rsnpe/inference.hpp"
#include "rsnpe/physics.hpp"
#include "rsnpe/simulator.hpp"

using namespace rsnpe;
using namespace rsnpe::inference;

namespace {

flow::FlowModel toy_model() {
    flow::FlowModel model = flow::make_flow_model(flow::FlowConfig{}, 101);
    // Center the de-standardization on the prior box so most samples land
    // inside the support check.
    model.norm.theta_mean = {7.0, 2.5, 0.25};
    model.norm.theta_std = {1.0, 0.5, 0.05};
    model.norm.ctx_mean = 0.0;
    model.norm.ctx_std = 2.0;
    return model;
}

Observation case_study() {
    Observation obs;
    obs.p_obs_db = 34.73;
    obs.p_ref_obs_db = 32.62;
    obs.r_obs_km = 300.0;
    obs.r_ref_obs_km = 250.0;
    obs.eps_ref_assumed = 3.1;
    return obs;
}

}  // namespace

TEST_CASE("summaries of simple samples") {
    const auto constant = summarize(std::vector<Real>(50, 3.25));
    CHECK(constant.mean == doctest::Approx(3.25));
    CHECK(constant.stddev == 0.0);
    CHECK(constant.q05 == 3.25);
    CHECK(constant.q95 == 3.25);

    std::vector<Real> seq(100);
    for (int i = 0; i < 100; ++i) seq[i] = static_cast<Real>(i + 1);
    CHECK(summarize(seq).q50 == doctest::Approx(50.5).epsilon(1e-12));

    Rng rng(103);
    std::vector<Real> normal(100000);
    for (auto& v : normal) v = rng.normal();
    CHECK(summarize(normal).stddev == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("quantiles are monotone and interpolate") {
    std::vector<Real> v{4.0, 1.0, 3.0, 2.0};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("inference pipeline: h computation and determinism") {
    const auto model = toy_model();
    const PriorSpec prior;
    const Observation obs = case_study();

    const uint64_t sims_before = simulator::rangeline_call_count();
    const auto result = infer(model, obs, 2000, 5, prior);
    CHECK(simulator::rangeline_call_count() == sims_before);  // amortized: no simulator calls

    // h recomputed by hand: linear powers, altitude rescale, reflectance.
    const Real p = physics::db_to_linear(34.73);
    const Real p_ref = physics::db_to_linear(32.62) * (300.0 / 250.0);
    const Real expected_h = p / p_ref * physics::fresnel_power_reflectance(3.1);
    CHECK(result.h_used == doctest::Approx(expected_h).epsilon(1e-14));
    CHECK(result.eps_ref_used == 3.1);
    CHECK(result.samples.size() == 2000);

    const auto again = infer(model, obs, 2000, 5, prior);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(result.samples[i].eps == again.samples[i].eps);
    }

    // Quantiles must be ordered.
    for (int d = 0; d < 3; ++d) {
        const auto& s = result.summary[d];
        CHECK(s.q05 <= s.q25);
        CHECK(s.q25 <= s.q50);
        CHECK(s.q50 <= s.q75);
        CHECK(s.q75 <= s.q95);
    }
    for (int d = 0; d < 3; ++d) CHECK(result.correlation[d][d] == 1.0);
}

TEST_CASE("sweep shares the noise seed and is monotone in h") {
    const auto model = toy_model();
    const PriorSpec prior;
    const Observation obs = case_study();

    const auto single = infer(model, obs, 500, 9, prior);
    const auto sweep1 = eps_ref_sweep(model, obs, {3.1}, 500, 9, prior);
    REQUIRE(sweep1.size() == 1);
    CHECK(sweep1[0].h_used == single.h_used);
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(sweep1[0].samples[i].eps == single.samples[i].eps);
        CHECK(sweep1[0].samples[i].sigma == single.samples[i].sigma);
    }

    const auto sweep = eps_ref_sweep(model, obs, {2.0, 3.1, 4.0}, 300, 10, prior);
    REQUIRE(sweep.size() == 3);
    CHECK(sweep[0].h_used < sweep[1].h_used);
    CHECK(sweep[1].h_used < sweep[2].h_used);
}

TEST_CASE("calibration invariance: common dB offsets cancel") {
    const auto model = toy_model();
    const PriorSpec prior;
    Observation obs = case_study();
    const auto base = infer(model, obs, 200, 11, prior);

    obs.p_obs_db += 17.3;
    obs.p_ref_obs_db += 17.3;
    const auto offset = infer(model, obs, 200, 11, prior);
    CHECK(offset.h_used == doctest::Approx(base.h_used).epsilon(1e-12));
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(offset.samples[i].eps == doctest::Approx(base.samples[i].eps).epsilon(1e-12));
    }
}

TEST_CASE("extrapolation flag and validation errors") {
    const auto model = toy_model();
    const PriorSpec prior;
    Observation obs = case_study();

    const auto sane = infer(model, obs, 100, 12, prior);
    CHECK(!sane.extrapolation);

    obs.p_obs_db = 200.0;  // absurd power: log h far outside training support
    const auto wild = infer(model, obs, 100, 12, prior);
    CHECK(wild.extrapolation);

    obs = case_study();
    obs.r_obs_km = -1.0;
    CHECK_THROWS_AS(infer(model, obs, 100, 12, prior), ConfigError);
    obs = case_study();
    obs.eps_ref_assumed = 0.5;
    CHECK_THROWS_AS(infer(model, obs, 100, 12, prior), ConfigError);
    CHECK_THROWS(eps_ref_sweep(model, case_study(), {}, 10, 0, prior));
}
