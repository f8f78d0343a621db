#include <doctest.h>

#include <cmath>
#include <vector>

#include "rsnpe/rqs.hpp"

using namespace rsnpe;
using namespace rsnpe::flow;

namespace {

std::vector<Real> random_raw(Rng& rng, int n_bins, Real scale = 0.8) {
    std::vector<Real> raw(spline_param_count(n_bins));
    for (auto& r : raw) r = scale * rng.normal();
    return raw;
}

}  // namespace

TEST_CASE("all-zero raw parameters decode to the identity spline") {
    const int K = 8;
    const Real B = 5.0;
    std::vector<Real> raw(spline_param_count(K), 0.0);
    const SplineParams p = decode_spline(raw.data(), K, B);
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        const Real x = rng.uniform(-7.0, 7.0);
        const SplineEval e = rqs_forward_scalar(x, p);
        CHECK(e.y == doctest::Approx(x).epsilon(1e-12));
        CHECK(std::abs(e.log_det) < 1e-12);
    }
}

TEST_CASE("points outside the tail bound pass through") {
    const int K = 6;
    Rng rng(22);
    const auto raw = random_raw(rng, K);
    const SplineParams p = decode_spline(raw.data(), K, 3.0);
    for (const Real x : {-9.0, -3.0, 3.0, 4.5}) {
        const SplineEval e = rqs_forward_scalar(x, p);
        CHECK(e.y == x);
        CHECK(e.log_det == 0.0);
    }
}

TEST_CASE("round trip and log-det antisymmetry") {
    const int K = 8;
    const Real B = 5.0;
    Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const auto raw = random_raw(rng, K, 1.2);
        const SplineParams p = decode_spline(raw.data(), K, B);
        const Real x = rng.uniform(-6.0, 6.0);
        const SplineEval fwd = rqs_forward_scalar(x, p);
        const SplineEval inv = rqs_inverse_scalar(fwd.y, p);
        CHECK(std::abs(inv.y - x) < 1e-10);
        CHECK(std::abs(fwd.log_det + inv.log_det) < 1e-10);
    }
}

TEST_CASE("log-det matches a central-difference derivative") {
    const int K = 8;
    const Real B = 5.0;
    Rng rng(24);
    const Real delta = 1e-6;
    int checked = 0;
    while (checked < 100) {
        const auto raw = random_raw(rng, K);
        const SplineParams p = decode_spline(raw.data(), K, B);
        const Real x = rng.uniform(-0.95 * B, 0.95 * B);
        // Keep the stencil inside one bin edge's smooth region.
        const Real y_plus = rqs_forward_scalar(x + delta, p).y;
        const Real y_minus = rqs_forward_scalar(x - delta, p).y;
        const Real fd = (y_plus - y_minus) / (2.0 * delta);
        const Real an = std::exp(rqs_forward_scalar(x, p).log_det);
        if (fd <= 0.0) continue;
        CHECK(std::abs(std::log(fd) - std::log(an)) < 1e-4);
        ++checked;
    }
}

TEST_CASE("monotonicity on a dense grid") {
    const int K = 8;
    Rng rng(25);
    const auto raw = random_raw(rng, K, 2.0);
    const SplineParams p = decode_spline(raw.data(), K, 5.0);
    Real prev = rqs_forward_scalar(-5.5, p).y;
    for (int i = 1; i <= 2200; ++i) {
        const Real x = -5.5 + i * 0.005;
        const Real y = rqs_forward_scalar(x, p).y;
        CHECK(y > prev);
        prev = y;
    }
}

TEST_CASE("backward gradients match finite differences") {
    const int K = 8;
    const Real B = 5.0;
    const int count = spline_param_count(K);
    Rng rng(26);
    const Real delta = 1e-6;

    for (int trial = 0; trial < 40; ++trial) {
        const auto raw = random_raw(rng, K);
        const Real x = rng.uniform(-0.9 * B, 0.9 * B);
        const SplineParams p = decode_spline(raw.data(), K, B);

        for (const bool value_path : {true, false}) {
            std::vector<Real> grad(count, 0.0);
            const Real gx = rqs_forward_backward(x, p, value_path ? 1.0 : 0.0,
                                                 value_path ? 0.0 : 1.0, grad.data());
            auto eval = [&](const std::vector<Real>& r, Real xx) {
                const SplineParams pp = decode_spline(r.data(), K, B);
                const SplineEval e = rqs_forward_scalar(xx, pp);
                return value_path ? e.y : e.log_det;
            };
            // d/dx
            const Real fd_x = (eval(raw, x + delta) - eval(raw, x - delta)) / (2.0 * delta);
            CHECK(gx == doctest::Approx(fd_x).epsilon(2e-4));
            // d/d(raw_i) over a subset of parameters
            for (int i = 0; i < count; i += 3) {
                auto bumped = raw;
                bumped[i] += delta;
                const Real up = eval(bumped, x);
                bumped[i] -= 2.0 * delta;
                const Real dn = eval(bumped, x);
                const Real fd = (up - dn) / (2.0 * delta);
                if (std::abs(fd) < 1e-9 && std::abs(grad[i]) < 1e-9) continue;
                CHECK(grad[i] == doctest::Approx(fd).epsilon(2e-4));
            }
        }
    }
}

TEST_CASE("vector wrappers compose per-element blocks") {
    const int K = 4;
    Rng rng(27);
    std::vector<Real> x{-0.5, 1.25, 7.0};
    std::vector<Real> raw(3 * spline_param_count(K));
    for (auto& r : raw) r = 0.5 * rng.normal();
    const VectorEval fwd = rqs_forward(x, raw, K, 3.0);
    const VectorEval back = rqs_inverse(fwd.values, raw, K, 3.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back.values[i] - x[i]) < 1e-10);
    CHECK(std::abs(fwd.log_det + back.log_det) < 1e-10);
    CHECK(fwd.values[2] == 7.0);  // outside the bound

    CHECK_THROWS(rqs_forward(x, std::vector<Real>(5, 0.0), K, 3.0));
    std::vector<Real> bad(3 * spline_param_count(K), 0.0);
    bad[1] = std::nan("");
    CHECK_THROWS(rqs_forward(x, bad, K, 3.0));
}
