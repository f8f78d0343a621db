#pragma once

#include <cstdint>
#include <vector>

#include "rsnpe/common.hpp"

namespace rsnpe::surface {

/// Target statistics and grid geometry for one surface realization.
struct SurfaceSpec {
    Real sigma = 0.0;   ///< RMS height, meters
    Real slope = 0.0;   ///< RMS slope (gradient-magnitude convention), rise/run
    Real dx = 1.5;      ///< facet edge, meters
    int n = 2;          ///< grid points per side
    uint64_t seed = 0;

    void validate() const;
};

/// Square grid of facet heights, row-major, meters.
struct SurfaceMesh {
    std::vector<Real> heights;
    int n = 0;
    Real dx = 0.0;

    Real at(int row, int col) const { return heights[static_cast<std::size_t>(row) * n + col]; }
};

/// Correlation length of the Gaussian autocorrelation tying sigma and slope:
/// for an isotropic Gaussian ACF, E[|grad z|^2] = 4 sigma^2 / l^2, so the
/// gradient-magnitude RMS slope m fixes l = 2 sigma / m.
inline Real correlation_length(Real sigma, Real slope) { return 2.0 * sigma / slope; }

/// Synthesizes a stationary zero-mean Gaussian random field with Gaussian
/// autocorrelation via spectral filtering of white noise. The field is
/// generated on a grid at least 1.25x the requested size and cropped to
/// suppress periodic wraparound. Deterministic given spec.seed.
SurfaceMesh synthesize_grf(const SurfaceSpec& spec);

struct SurfaceStats {
    Real sigma_hat = 0.0;  ///< RMS of (heights - mean)
    Real slope_hat = 0.0;  ///< RMS magnitude of the central-difference gradient
};

SurfaceStats estimate_surface_stats(const SurfaceMesh& mesh);

}  // namespace rsnpe::surface
