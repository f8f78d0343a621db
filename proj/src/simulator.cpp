#include "rsnpe/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rsnpe/fft.hpp"
#include "rsnpe/physics.hpp"

namespace rsnpe::simulator {

namespace {
std::atomic<uint64_t> g_rangeline_calls{0};
}

uint64_t rangeline_call_count() { return g_rangeline_calls.load(); }

void RadarConfig::validate() const {
    if (!(fc_mhz > 0.0)) throw ConfigError("radar.fc_mhz: must be > 0");
    if (!(altitude_km > 0.0)) throw ConfigError("radar.altitude_km: must be > 0");
    if (!(fs_mhz > 0.0)) throw ConfigError("radar.fs_mhz: must be > 0");
    if (n_samples < 16) throw ConfigError("radar.n_samples: must be >= 16");
    if (!(noise_alpha > 0.0)) throw ConfigError("radar.noise_alpha: must be > 0");
    if (!(tx_amplitude > 0.0)) throw ConfigError("radar.tx_amplitude: must be > 0");
    if (!std::isfinite(snr_db)) throw ConfigError("radar.snr_db: must be finite");
    const Real lam = wavelength_m();
    if (facet_size_m() > lam / 10.0 * (1.0 + 1e-12)) {
        throw ConfigError("radar.dx_m: facet size must not exceed lambda/10 = " +
                          std::to_string(lam / 10.0) + " m");
    }
    if (footprint_m() > fresnel_radius_m() * (1.0 + 1e-9)) {
        throw ConfigError("radar.footprint_radius_m: must not exceed the first-Fresnel-zone "
                          "radius " +
                          std::to_string(fresnel_radius_m()) + " m");
    }
}

int footprint_grid_size(const RadarConfig& cfg) {
    const Real radius = cfg.footprint_m();
    const int half = static_cast<int>(std::ceil(radius / cfg.facet_size_m())) + 1;
    return 2 * half + 1;
}

std::size_t footprint_facet_count(const RadarConfig& cfg) {
    const int n = footprint_grid_size(cfg);
    const int half = (n - 1) / 2;
    const Real dx = cfg.facet_size_m();
    const Real r2 = cfg.footprint_m() * cfg.footprint_m();
    std::size_t count = 0;
    for (int i = -half; i <= half; ++i) {
        for (int j = -half; j <= half; ++j) {
            const Real x = i * dx;
            const Real y = j * dx;
            if (x * x + y * y <= r2) ++count;
        }
    }
    return count;
}

Real flat_plate_peak_power(const RadarConfig& cfg, Real eps) {
    const Real gamma = std::abs(physics::fresnel_amplitude(eps));
    const Real dx = cfg.facet_size_m();
    const Real r = cfg.altitude_m();
    const Real n = static_cast<Real>(footprint_facet_count(cfg));
    const Real amp = cfg.tx_amplitude * gamma * dx * dx * n / (r * r);
    return amp * amp;
}

Real noise_level(const RadarConfig& cfg) {
    if (!cfg.noise_enabled) return 0.0;
    return flat_plate_peak_power(cfg, 3.1) / physics::db_to_linear(cfg.snr_db);
}

std::vector<FacetField> facet_fields(const surface::SurfaceMesh& mesh, const TerrainParams& theta,
                                     const RadarConfig& cfg) {
    cfg.validate();
    const Real dx = cfg.facet_size_m();
    const Real radius = cfg.footprint_m();
    const int n = mesh.n;
    const Real half_extent = (n - 1) / 2 * dx;
    if (mesh.dx != dx) {
        throw std::invalid_argument("facet_fields: mesh facet size does not match the config");
    }
    if (half_extent + 1e-9 < radius) {
        throw std::invalid_argument("facet_fields: mesh does not cover the footprint disk");
    }

    const Real r = cfg.altitude_m();
    const Real k = 2.0 * M_PI / cfg.wavelength_m();
    const Real gamma = physics::fresnel_amplitude(theta.eps);
    const Real base_amp = cfg.tx_amplitude * gamma * dx * dx / (r * r);
    const Real inv2dx = 1.0 / (2.0 * dx);
    const int mid = (n - 1) / 2;
    const Real r2 = radius * radius;

    // Gather in-footprint facet indices once so the field evaluation can run
    // in parallel over a dense array with a deterministic layout.
    std::vector<int> rows, cols;
    rows.reserve(static_cast<std::size_t>(n) * n);
    cols.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const Real y = (i - mid) * dx;
        for (int j = 0; j < n; ++j) {
            const Real x = (j - mid) * dx;
            if (x * x + y * y <= r2 && i > 0 && i + 1 < n && j > 0 && j + 1 < n) {
                rows.push_back(i);
                cols.push_back(j);
            }
        }
    }
    if (rows.empty()) throw std::invalid_argument("facet_fields: empty footprint");

    std::vector<FacetField> fields(rows.size());
    parallel_chunks(rows.size(), 4096, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t idx = b; idx < e; ++idx) {
            const int i = rows[idx];
            const int j = cols[idx];
            const Real z = mesh.at(i, j);
            const Real gx = (mesh.at(i, j + 1) - mesh.at(i, j - 1)) * inv2dx;
            const Real gy = (mesh.at(i + 1, j) - mesh.at(i - 1, j)) * inv2dx;
            const Real cos_tilt = 1.0 / std::sqrt(1.0 + gx * gx + gy * gy);
            const Real range = r - z;
            const Real phase = -2.0 * k * range;
            fields[idx].amplitude =
                base_amp * cos_tilt * Complex(std::cos(phase), std::sin(phase));
            fields[idx].delay = 2.0 * range / kSpeedOfLight;
        }
    });
    return fields;
}

std::vector<Complex> galactic_noise(int n_samples, Real dt, Real alpha, Real level,
                                    uint64_t seed) {
    if (n_samples < 16) throw std::invalid_argument("galactic_noise: n_samples must be >= 16");
    if (!(alpha > 0.0)) throw std::invalid_argument("galactic_noise: alpha must be > 0");
    if (!(level >= 0.0)) throw std::invalid_argument("galactic_noise: level must be >= 0");
    std::vector<Complex> out(static_cast<std::size_t>(n_samples), Complex(0.0, 0.0));
    if (level == 0.0) return out;

    const std::size_t n = static_cast<std::size_t>(n_samples);
    const Real df = 1.0 / (static_cast<Real>(n) * dt);
    std::vector<Real> variance(n);
    Real total = 0.0;
    for (std::size_t kbin = 0; kbin < n; ++kbin) {
        const std::size_t m = std::min(kbin, n - kbin);
        const Real f = df * static_cast<Real>(m == 0 ? 1 : m);  // DC regularized
        variance[kbin] = std::pow(f, -alpha);
        total += variance[kbin];
    }
    // E|x_t|^2 = (1/n^2) sum_k var_k; scale so it equals `level`.
    const Real scale = level * static_cast<Real>(n) * static_cast<Real>(n) / total;

    Rng rng(derive_seed(seed, 0x6a1aULL));
    for (std::size_t kbin = 0; kbin < n; ++kbin) {
        const Real sd = std::sqrt(scale * variance[kbin] / 2.0);
        out[kbin] = Complex(sd * rng.normal(), sd * rng.normal());
    }
    fft::dft(out, true);
    return out;
}

Rangeline delay_and_sum(const std::vector<FacetField>& fields, const RadarConfig& cfg) {
    if (fields.empty()) throw std::invalid_argument("delay_and_sum: no facet contributions");
    Real dmin = fields[0].delay, dmax = fields[0].delay;
    for (const auto& f : fields) {
        dmin = std::min(dmin, f.delay);
        dmax = std::max(dmax, f.delay);
    }
    const Real spread = dmax - dmin;
    const Real dt = cfg.dt_s();
    const Real window = static_cast<Real>(cfg.n_samples) * dt;
    if (window < 1.1 * spread) {
        throw ConfigError("radar.n_samples: echo window " + std::to_string(window) +
                          " s cannot hold the footprint delay spread " + std::to_string(spread) +
                          " s with a 10% margin");
    }

    Rangeline line;
    line.dt = dt;
    line.t0 = 0.5 * (dmin + dmax) - 0.5 * window;
    line.samples.assign(static_cast<std::size_t>(cfg.n_samples), Complex(0.0, 0.0));

    // Nearest-sample binning, accumulated in facet order for determinism.
    for (const auto& f : fields) {
        const auto idx = static_cast<std::size_t>(std::llround((f.delay - line.t0) / dt));
        line.samples[idx] += f.amplitude;
    }
    return line;
}

surface::SurfaceSpec simulation_mesh_spec(const TerrainParams& theta, const RadarConfig& cfg,
                                          uint64_t seed) {
    surface::SurfaceSpec spec;
    spec.sigma = theta.sigma;
    spec.dx = cfg.facet_size_m();
    spec.n = footprint_grid_size(cfg);
    spec.seed = derive_seed(seed, 0x3e51ULL);
    // Slopes steeper than sigma/dx imply a correlation length below the facet
    // resolution; the mesh represents the surface at scale dx, so the
    // synthesis slope is clamped to that floor.
    spec.slope = theta.sigma > 0.0 && theta.slope > 0.0
                     ? std::min(theta.slope, theta.sigma / spec.dx)
                     : theta.slope;
    return spec;
}

Rangeline simulate_rangeline(const TerrainParams& theta, const RadarConfig& cfg, uint64_t seed) {
    g_rangeline_calls.fetch_add(1);
    cfg.validate();
    if (!(theta.eps >= 1.0)) throw ConfigError("theta.eps: must be >= 1");
    if (!(theta.sigma >= 0.0)) throw ConfigError("theta.sigma: must be >= 0");
    if (!(theta.slope >= 0.0)) throw ConfigError("theta.slope: must be >= 0");

    const surface::SurfaceMesh mesh =
        surface::synthesize_grf(simulation_mesh_spec(theta, cfg, seed));

    Rangeline line = delay_and_sum(facet_fields(mesh, theta, cfg), cfg);

    const Real level = noise_level(cfg);
    if (level > 0.0) {
        const std::vector<Complex> noise = galactic_noise(
            cfg.n_samples, cfg.dt_s(), cfg.noise_alpha, level, derive_seed(seed, 0x901eULL));
        for (std::size_t i = 0; i < line.samples.size(); ++i) line.samples[i] += noise[i];
    }
    return line;
}

Real peak_power(const Rangeline& r) {
    if (r.samples.empty()) throw std::invalid_argument("peak_power: empty rangeline");
    Real best = 0.0;
    for (const auto& s : r.samples) best = std::max(best, std::norm(s));
    return best;
}

}  // namespace rsnpe::simulator
