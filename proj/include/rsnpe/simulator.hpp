#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "rsnpe/common.hpp"
#include "rsnpe/surface.hpp"

namespace rsnpe::simulator {

using Complex = std::complex<Real>;

/// Propagation speed, m/s. The nominal 3e8 keeps the 20 MHz carrier at a
/// wavelength of exactly 15 m, so the lambda/10 facet constraint lands on
/// round numbers.
inline constexpr Real kSpeedOfLight = 3.0e8;

/// Radar and sampling settings. Distances/areas in the units named by each
/// field; zero-valued dx_m / footprint_radius_m mean "derive the default"
/// (lambda/10 and the first-Fresnel-zone radius, respectively).
struct RadarConfig {
    Real fc_mhz = 20.0;
    Real altitude_km = 300.0;
    Real dx_m = 0.0;
    Real footprint_radius_m = 0.0;
    Real fs_mhz = 26.67;
    int n_samples = 512;
    Real noise_alpha = 2.5;
    Real snr_db = 30.0;
    Real tx_amplitude = 1.0;
    bool noise_enabled = true;

    Real wavelength_m() const { return kSpeedOfLight / (fc_mhz * 1e6); }
    Real altitude_m() const { return altitude_km * 1e3; }
    Real dt_s() const { return 1.0 / (fs_mhz * 1e6); }
    Real facet_size_m() const { return dx_m > 0.0 ? dx_m : wavelength_m() / 10.0; }
    Real fresnel_radius_m() const { return std::sqrt(wavelength_m() * altitude_m() / 2.0); }
    Real footprint_m() const {
        return footprint_radius_m > 0.0 ? footprint_radius_m : fresnel_radius_m();
    }

    void validate() const;
};

/// The inferred triplet: dielectric constant, RMS height (m), RMS slope.
struct TerrainParams {
    Real eps = 1.0;
    Real sigma = 0.0;
    Real slope = 0.0;
};

/// Complex echo samples on a uniform time grid starting at t0.
struct Rangeline {
    std::vector<Complex> samples;
    Real dt = 0.0;
    Real t0 = 0.0;
};

struct FacetField {
    Complex amplitude;
    Real delay;  ///< two-way travel time, s
};

/// One scattered contribution per facet inside the footprint disk, using the
/// constant-phase approximation about the mean plane: phase and delay follow
/// the facet range r - z (height enters linearly), while spreading and the
/// tilt obliquity are evaluated on the mean plane so they do not depend on z.
/// amplitude = tx * gamma(eps) * dx^2 * cos(tilt) / r^2 * exp(-i 2k (r - z)).
std::vector<FacetField> facet_fields(const surface::SurfaceMesh& mesh, const TerrainParams& theta,
                                     const RadarConfig& cfg);

/// Zero-mean complex Gaussian series whose power spectrum follows f^-alpha
/// (DC bin regularized to the first bin's frequency). `level` is the average
/// per-sample power E|n|^2; level = 0 returns zeros. Deterministic given seed.
std::vector<Complex> galactic_noise(int n_samples, Real dt, Real alpha, Real level, uint64_t seed);

/// Grid side length (odd) that covers the footprint disk with a one-facet
/// margin for central differences.
int footprint_grid_size(const RadarConfig& cfg);

/// Number of facet centers inside the footprint disk.
std::size_t footprint_facet_count(const RadarConfig& cfg);

/// Coherent flat-plate peak power for a plate of permittivity eps: all facets
/// share one phase, so P = (tx * |gamma| * dx^2 * N / r^2)^2.
Real flat_plate_peak_power(const RadarConfig& cfg, Real eps);

/// Average noise sample power implied by cfg.snr_db, referenced to the
/// noiseless flat-plate peak power at eps = 3.1.
Real noise_level(const RadarConfig& cfg);

/// Surface-synthesis settings simulate_rangeline uses for (theta, cfg, seed):
/// footprint-covering grid, derived mesh seed, and the synthesis slope
/// clamped to sigma/dx (a facet mesh cannot carry correlation below its own
/// resolution).
surface::SurfaceSpec simulation_mesh_spec(const TerrainParams& theta, const RadarConfig& cfg,
                                          uint64_t seed);

/// Noiseless delay-and-sum of facet contributions: nearest-sample binning on
/// a window centered on the delay spread, which must fit with >= 10% margin.
Rangeline delay_and_sum(const std::vector<FacetField>& fields, const RadarConfig& cfg);

/// Full forward model: GRF mesh -> facet fields -> delay-and-sum rangeline
/// plus galactic noise.
Rangeline simulate_rangeline(const TerrainParams& theta, const RadarConfig& cfg, uint64_t seed);

/// max_t |R(t)|^2
Real peak_power(const Rangeline& r);

/// Number of simulate_rangeline invocations so far (process-wide); used to
/// assert that inference never touches the simulator.
uint64_t rangeline_call_count();

}  // namespace rsnpe::simulator
