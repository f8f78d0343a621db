#include <doctest.h>

#include <cmath>

#include "rsnpe/common.hpp"
#include "rsnpe/physics.hpp"

using namespace rsnpe;
using namespace rsnpe::physics;

TEST_CASE("fresnel reflectance known values") {
    CHECK(fresnel_power_reflectance(1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(fresnel_power_reflectance(4.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));

    // Direct arithmetic evaluation for eps = 3.1.
    const Real root = std::sqrt(3.1);
    const Real expected = std::pow((1.0 - root) / (1.0 + root), 2.0);
    CHECK(fresnel_power_reflectance(3.1) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(fresnel_power_reflectance(3.1) == doctest::Approx(0.075923).epsilon(1e-5));
}

TEST_CASE("fresnel reflectance domain and monotonicity") {
    CHECK_THROWS_AS(fresnel_power_reflectance(0.5), std::domain_error);
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const Real a = rng.uniform(1.0001, 80.0);
        const Real b = a + rng.uniform(0.01, 5.0);
        CHECK(fresnel_power_reflectance(b) > fresnel_power_reflectance(a));
        CHECK(fresnel_power_reflectance(b) < 1.0);
    }
}

TEST_CASE("compute_h examples") {
    CHECK(compute_h(2.5, 2.5, 4.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(compute_h(2.0, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

    const Real ratio = std::pow(10.0, 2.11 / 10.0);
    const Real expected = ratio * fresnel_power_reflectance(3.1);
    CHECK(compute_h(ratio, 1.0, 3.1) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(compute_h(ratio, 1.0, 3.1) == doctest::Approx(0.123416).epsilon(1e-5));

    CHECK_THROWS_AS(compute_h(1.0, 0.0, 4.0), std::domain_error);
    CHECK_THROWS_AS(compute_h(1.0, 1.0, 0.5), std::domain_error);
}

TEST_CASE("compute_h is linear in p and calibration invariant") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Real p = rng.uniform(0.0, 50.0);
        const Real p_ref = rng.uniform(0.1, 50.0);
        const Real eps_ref = rng.uniform(1.0, 10.0);
        const Real a = rng.uniform(0.0, 4.0);
        const Real gain = rng.uniform(0.01, 100.0);
        CHECK(compute_h(a * p, p_ref, eps_ref) ==
              doctest::Approx(a * compute_h(p, p_ref, eps_ref)).epsilon(1e-12));
        CHECK(compute_h(gain * p, gain * p_ref, eps_ref) ==
              doctest::Approx(compute_h(p, p_ref, eps_ref)).epsilon(1e-12));
    }
}

TEST_CASE("dB conversions") {
    CHECK(db_to_linear(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(db_to_linear(34.73) == doctest::Approx(std::pow(10.0, 3.473)).epsilon(1e-14));
    CHECK(db_to_linear(34.73) == doctest::Approx(2971.666).epsilon(1e-5));
    CHECK_THROWS_AS(linear_to_db(0.0), std::domain_error);

    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const Real x = rng.uniform(-100.0, 100.0);
        CHECK(std::abs(linear_to_db(db_to_linear(x)) - x) < 1e-12);
    }
}

TEST_CASE("altitude rescale") {
    CHECK(altitude_rescale(3.7, 250.0, 250.0) == doctest::Approx(3.7).epsilon(1e-15));
    CHECK(altitude_rescale(1.0, 250.0, 300.0) == doctest::Approx(1.2).epsilon(1e-14));

    const Real p_ref = db_to_linear(32.62);
    const Real rescaled_db = linear_to_db(altitude_rescale(p_ref, 250.0, 300.0));
    CHECK(rescaled_db == doctest::Approx(32.62 + 10.0 * std::log10(1.2)).epsilon(1e-12));
    CHECK(rescaled_db == doctest::Approx(33.41).epsilon(1e-4));

    // Negative exponent flips the correction direction.
    CHECK(altitude_rescale(1.0, 250.0, 300.0, -1) == doctest::Approx(1.0 / 1.2).epsilon(1e-14));

    CHECK_THROWS_AS(altitude_rescale(1.0, 0.0, 300.0), std::domain_error);
    CHECK_THROWS_AS(altitude_rescale(1.0, 250.0, -5.0), std::domain_error);
}
