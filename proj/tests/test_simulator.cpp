#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>

#include "rsnpe/physics.hpp"
#include "rsnpe/fft.hpp"
#include "rsnpe/simulator.hpp"

using namespace rsnpe;
using namespace rsnpe::simulator;

namespace {

/// Fast desk-scale configuration: 1 km altitude keeps the footprint grid
/// around 120x120 facets.
RadarConfig desk_config(bool noise = false) {
    RadarConfig cfg;
    cfg.altitude_km = 1.0;
    cfg.noise_enabled = noise;
    return cfg;
}

surface::SurfaceMesh flat_mesh(const RadarConfig& cfg, Real height = 0.0) {
    surface::SurfaceMesh mesh;
    mesh.n = footprint_grid_size(cfg);
    mesh.dx = cfg.facet_size_m();
    mesh.heights.assign(static_cast<std::size_t>(mesh.n) * mesh.n, height);
    return mesh;
}

Real coherent_peak(const std::vector<FacetField>& fields) {
    std::complex<Real> sum(0.0, 0.0);
    for (const auto& f : fields) sum += f.amplitude;
    return std::norm(sum);
}

}  // namespace

TEST_CASE("flat mesh gives constant delays at 2r/c") {
    const RadarConfig cfg = desk_config();
    const auto mesh = flat_mesh(cfg);
    const auto fields = facet_fields(mesh, TerrainParams{4.0, 0.0, 0.0}, cfg);
    REQUIRE(!fields.empty());
    const Real expected = 2.0 * cfg.altitude_m() / kSpeedOfLight;
    for (const auto& f : fields) {
        CHECK(f.delay == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("per-facet amplitude ratio follows the Fresnel coefficient") {
    const RadarConfig cfg = desk_config();
    const auto mesh = flat_mesh(cfg);
    const auto f4 = facet_fields(mesh, TerrainParams{4.0, 0.0, 0.0}, cfg);
    const auto f9 = facet_fields(mesh, TerrainParams{9.0, 0.0, 0.0}, cfg);
    REQUIRE(f4.size() == f9.size());
    for (std::size_t i = 0; i < f4.size(); i += 97) {
        const Real ratio = std::abs(f4[i].amplitude) / std::abs(f9[i].amplitude);
        CHECK(ratio == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("doubling altitude follows the spreading law") {
    RadarConfig near = desk_config();
    RadarConfig far = desk_config();
    far.altitude_km = 2.0 * near.altitude_km;
    // Same footprint/grid for both so facets match one to one.
    near.footprint_radius_m = near.fresnel_radius_m();
    far.footprint_radius_m = near.footprint_radius_m;

    const auto mesh = flat_mesh(near);
    const auto fn = facet_fields(mesh, TerrainParams{4.0, 0.0, 0.0}, near);
    const auto ff = facet_fields(mesh, TerrainParams{4.0, 0.0, 0.0}, far);
    REQUIRE(fn.size() == ff.size());
    const Real delay_shift = 2.0 * near.altitude_m() / kSpeedOfLight;
    for (std::size_t i = 0; i < fn.size(); i += 131) {
        CHECK(std::abs(ff[i].amplitude) ==
              doctest::Approx(std::abs(fn[i].amplitude) / 4.0).epsilon(1e-12));
        CHECK(ff[i].delay - fn[i].delay == doctest::Approx(delay_shift).epsilon(1e-12));
    }
}

TEST_CASE("empty footprint is rejected") {
    RadarConfig cfg = desk_config();
    surface::SurfaceMesh tiny;
    tiny.n = 3;
    tiny.dx = cfg.facet_size_m();
    tiny.heights.assign(9, 0.0);
    CHECK_THROWS(facet_fields(tiny, TerrainParams{4.0, 0.0, 0.0}, cfg));
}

TEST_CASE("galactic noise basics") {
    const auto zeros = galactic_noise(64, 1e-7, 2.5, 0.0, 5);
    for (const auto& z : zeros) CHECK(std::abs(z) == 0.0);

    const auto a = galactic_noise(256, 1e-7, 2.5, 1.0, 5);
    const auto b = galactic_noise(256, 1e-7, 2.5, 1.0, 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    // Average power should approach the requested level over an ensemble.
    Real power = 0.0;
    const int trials = 60;
    for (int t = 0; t < trials; ++t) {
        const auto n = galactic_noise(512, 1e-7, 2.5, 3.0, 100 + t);
        Real p = 0.0;
        for (const auto& s : n) p += std::norm(s);
        power += p / static_cast<Real>(n.size());
    }
    CHECK(power / trials == doctest::Approx(3.0).epsilon(0.25));

    CHECK_THROWS(galactic_noise(8, 1e-7, 2.5, 1.0, 0));
    CHECK_THROWS(galactic_noise(64, 1e-7, -1.0, 1.0, 0));
}

TEST_CASE("noise spectrum follows the power law") {
    const int n = 2048;
    const Real dt = 1e-7;
    const Real alpha = 2.5;
    std::vector<Real> avg_power(n, 0.0);
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        auto series = galactic_noise(n, dt, alpha, 1.0, 500 + t);
        fft::dft(series, false);
        for (int k = 0; k < n; ++k) avg_power[k] += std::norm(series[k]);
    }
    // Log-log fit across the central decade of positive frequencies.
    const Real df = 1.0 / (n * dt);
    const Real f_lo = std::sqrt(df * (df * n / 2.0)) / std::sqrt(10.0);
    const Real f_hi = f_lo * 10.0;
    Real sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (int k = 1; k < n / 2; ++k) {
        const Real f = df * k;
        if (f < f_lo || f > f_hi) continue;
        const Real x = std::log(f);
        const Real y = std::log(avg_power[k] / trials);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    const Real slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-alpha).epsilon(0.12));
}

TEST_CASE("flat plate puts all energy in one bin at 2r/c") {
    const RadarConfig cfg = desk_config();
    const auto line = simulate_rangeline(TerrainParams{4.0, 0.0, 0.0}, cfg, 1);
    std::size_t nonzero = 0, peak_idx = 0;
    Real peak = 0.0;
    for (std::size_t i = 0; i < line.samples.size(); ++i) {
        const Real p = std::norm(line.samples[i]);
        if (p > 0.0) ++nonzero;
        if (p > peak) {
            peak = p;
            peak_idx = i;
        }
    }
    CHECK(nonzero == 1);
    const Real t_peak = line.t0 + static_cast<Real>(peak_idx) * line.dt;
    CHECK(std::abs(t_peak - 2.0 * cfg.altitude_m() / kSpeedOfLight) <= line.dt);
    CHECK(peak == doctest::Approx(flat_plate_peak_power(cfg, 4.0)).epsilon(1e-12));
}

TEST_CASE("flat plate peak ratio matches the reflectance ratio") {
    const RadarConfig cfg = desk_config();
    const Real p3 = peak_power(simulate_rangeline(TerrainParams{3.0, 0.0, 0.0}, cfg, 2));
    const Real p8 = peak_power(simulate_rangeline(TerrainParams{8.0, 0.0, 0.0}, cfg, 2));
    const Real expected =
        physics::fresnel_power_reflectance(3.0) / physics::fresnel_power_reflectance(8.0);
    const Real db_error = std::abs(10.0 * std::log10((p3 / p8) / expected));
    CHECK(db_error < 0.5);
    CHECK(p3 / p8 == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("half-wavelength height shift leaves the peak power unchanged") {
    const RadarConfig cfg = desk_config();
    const auto base = flat_mesh(cfg);
    const auto raised = flat_mesh(cfg, cfg.wavelength_m() / 2.0);
    const Real p0 = coherent_peak(facet_fields(base, TerrainParams{5.0, 0.0, 0.0}, cfg));
    const Real p1 = coherent_peak(facet_fields(raised, TerrainParams{5.0, 0.0, 0.0}, cfg));
    CHECK(std::abs(p1 - p0) / p0 < 1e-6);
}

TEST_CASE("peak power is monotone in permittivity for flat plates") {
    const RadarConfig cfg = desk_config();
    Real prev = 0.0;
    for (const Real eps : {2.0, 4.0, 8.0, 12.0}) {
        const Real p = peak_power(simulate_rangeline(TerrainParams{eps, 0.0, 0.0}, cfg, 3));
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("transmit amplitude scales peak power quadratically") {
    RadarConfig cfg = desk_config();
    const Real p1 = peak_power(simulate_rangeline(TerrainParams{6.0, 1.0, 0.2}, cfg, 17));
    cfg.tx_amplitude = 3.0;
    const Real p3 = peak_power(simulate_rangeline(TerrainParams{6.0, 1.0, 0.2}, cfg, 17));
    CHECK(p3 == doctest::Approx(9.0 * p1).epsilon(1e-10));
}

TEST_CASE("roughness reduces peak power") {
    const RadarConfig cfg = desk_config();
    const Real flat = peak_power(simulate_rangeline(TerrainParams{5.0, 0.0, 0.0}, cfg, 0));
    Real rough_sum = 0.0;
    const int trials = 5;
    for (int t = 0; t < trials; ++t) {
        rough_sum += peak_power(simulate_rangeline(TerrainParams{5.0, 5.0, 0.3}, cfg, 40 + t));
    }
    CHECK(rough_sum / trials < flat);
}

TEST_CASE("rangeline determinism and energy bound") {
    const RadarConfig cfg = desk_config();
    const TerrainParams theta{7.0, 2.0, 0.25};
    const auto a = simulate_rangeline(theta, cfg, 123);
    const auto b = simulate_rangeline(theta, cfg, 123);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.t0 == b.t0);
    CHECK(std::memcmp(a.samples.data(), b.samples.data(),
                      a.samples.size() * sizeof(Complex)) == 0);

    // Triangle inequality on the coherent sum.
    surface::SurfaceSpec spec;
    spec.sigma = theta.sigma;
    spec.slope = theta.slope;
    spec.dx = cfg.facet_size_m();
    spec.n = footprint_grid_size(cfg);
    spec.seed = 9;
    const auto mesh = surface::synthesize_grf(spec);
    const auto fields = facet_fields(mesh, theta, cfg);
    Real amp_sum = 0.0;
    for (const auto& f : fields) amp_sum += std::abs(f.amplitude);
    const auto line = delay_and_sum(fields, cfg);
    CHECK(peak_power(line) <= amp_sum * amp_sum * (1.0 + 1e-12));
}

TEST_CASE("sub-resolution slopes clamp to the facet floor") {
    const RadarConfig cfg = desk_config();
    const Real dx = cfg.facet_size_m();

    // Steep corner of the prior: correlation length below the grid.
    const auto steep = simulation_mesh_spec(TerrainParams{4.0, 0.2, 0.5}, cfg, 1);
    CHECK(steep.slope == doctest::Approx(0.2 / dx).epsilon(1e-12));
    CHECK_NOTHROW(simulate_rangeline(TerrainParams{4.0, 0.2, 0.5}, cfg, 1));

    // Resolvable combinations pass through unchanged.
    const auto gentle = simulation_mesh_spec(TerrainParams{4.0, 2.0, 0.1}, cfg, 1);
    CHECK(gentle.slope == 0.1);
    const auto flat = simulation_mesh_spec(TerrainParams{4.0, 0.0, 0.0}, cfg, 1);
    CHECK(flat.slope == 0.0);
}

TEST_CASE("window too small for the delay spread") {
    RadarConfig cfg = desk_config();
    cfg.fs_mhz = 4000.0;  // 0.25 ns samples: 16-sample window is ~4 ns
    cfg.n_samples = 16;
    CHECK_THROWS_AS(simulate_rangeline(TerrainParams{4.0, 5.0, 0.3}, cfg, 7), ConfigError);
}

TEST_CASE("config validation catches bad fields") {
    RadarConfig cfg = desk_config();
    cfg.dx_m = 2.0;  // exceeds lambda/10
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = desk_config();
    cfg.footprint_radius_m = cfg.fresnel_radius_m() * 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = desk_config();
    cfg.n_samples = 4;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
