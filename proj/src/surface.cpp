#include "rsnpe/surface.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rsnpe/fft.hpp"

namespace rsnpe::surface {

void SurfaceSpec::validate() const {
    if (!(sigma >= 0.0)) throw ConfigError("surface.sigma: must be >= 0");
    if (!(slope >= 0.0)) throw ConfigError("surface.slope: must be >= 0");
    if (!(dx > 0.0)) throw ConfigError("surface.dx: must be > 0");
    if (n < 2) throw ConfigError("surface.n: must be >= 2");
    if (sigma > 0.0) {
        if (slope == 0.0) {
            throw ConfigError(
                "surface.slope: zero slope with positive sigma implies an infinite "
                "correlation length; only sigma=0 yields a flat plate");
        }
        const Real l = correlation_length(sigma, slope);
        if (l < 2.0 * dx) {
            throw ConfigError("surface: correlation length " + std::to_string(l) +
                              " m is not resolvable on a grid with dx=" + std::to_string(dx) +
                              " m (need l >= 2*dx)");
        }
    }
}

SurfaceMesh synthesize_grf(const SurfaceSpec& spec) {
    spec.validate();
    SurfaceMesh mesh;
    mesh.n = spec.n;
    mesh.dx = spec.dx;
    mesh.heights.assign(static_cast<std::size_t>(spec.n) * spec.n, 0.0);
    if (spec.sigma == 0.0) return mesh;  // flat plate

    const std::size_t nsyn = fft::next_pow2(
        static_cast<std::size_t>(std::ceil(1.25 * static_cast<Real>(spec.n))));
    const Real l = correlation_length(spec.sigma, spec.slope);

    // White complex Gaussian noise shaped by the root Gaussian spectrum
    // H(k) = exp(-l^2 |k|^2 / 8), which squares to the spectrum of
    // C(r) = sigma^2 exp(-r^2/l^2). Amplitude is normalized afterwards so the
    // expected grid variance is exactly sigma^2.
    std::vector<fft::Complex> grid(nsyn * nsyn);
    Rng rng(derive_seed(spec.seed, 0x51abULL));
    for (auto& g : grid) {
        const Real re = rng.normal();
        const Real im = rng.normal();
        g = fft::Complex(re, im);
    }

    const Real dk = 2.0 * M_PI / (static_cast<Real>(nsyn) * spec.dx);
    Real filter_power = 0.0;
    std::vector<Real> filt(nsyn);
    for (std::size_t i = 0; i < nsyn; ++i) {
        const Real ki = dk * static_cast<Real>(i <= nsyn / 2 ? i : nsyn - i);
        filt[i] = ki;
    }
    for (std::size_t r = 0; r < nsyn; ++r) {
        for (std::size_t c = 0; c < nsyn; ++c) {
            const Real k2 = filt[r] * filt[r] + filt[c] * filt[c];
            const Real h = std::exp(-l * l * k2 / 8.0);
            grid[r * nsyn + c] *= h;
            filter_power += h * h;
        }
    }

    fft::transform2d(grid, nsyn, true);

    // After the inverse transform each sample is (1/N^2) sum_k W_k H_k e^{...},
    // with E|W_k|^2 = 2, so E[Re^2] = sum_k H_k^2 / N^4. Scale to sigma^2.
    const Real n4 = static_cast<Real>(nsyn) * static_cast<Real>(nsyn) *
                    static_cast<Real>(nsyn) * static_cast<Real>(nsyn);
    const Real expected_var = filter_power / n4;
    const Real scale = spec.sigma / std::sqrt(expected_var);

    const std::size_t off = (nsyn - static_cast<std::size_t>(spec.n)) / 2;
    for (int r = 0; r < spec.n; ++r) {
        for (int c = 0; c < spec.n; ++c) {
            mesh.heights[static_cast<std::size_t>(r) * spec.n + c] =
                scale * grid[(off + r) * nsyn + (off + c)].real();
        }
    }
    return mesh;
}

SurfaceStats estimate_surface_stats(const SurfaceMesh& mesh) {
    const int n = mesh.n;
    if (n < 3) throw std::invalid_argument("estimate_surface_stats: grid must be at least 3x3");
    if (mesh.heights.size() != static_cast<std::size_t>(n) * n) {
        throw std::invalid_argument("estimate_surface_stats: non-square height grid");
    }

    Real mean = 0.0;
    for (Real h : mesh.heights) mean += h;
    mean /= static_cast<Real>(mesh.heights.size());

    Real var = 0.0;
    for (Real h : mesh.heights) {
        const Real d = h - mean;
        var += d * d;
    }
    var /= static_cast<Real>(mesh.heights.size());

    // Central differences on interior points; slope is the gradient magnitude.
    Real ms_slope = 0.0;
    std::size_t count = 0;
    const Real inv2dx = 1.0 / (2.0 * mesh.dx);
    for (int r = 1; r + 1 < n; ++r) {
        for (int c = 1; c + 1 < n; ++c) {
            const Real gx = (mesh.at(r, c + 1) - mesh.at(r, c - 1)) * inv2dx;
            const Real gy = (mesh.at(r + 1, c) - mesh.at(r - 1, c)) * inv2dx;
            ms_slope += gx * gx + gy * gy;
            ++count;
        }
    }
    ms_slope /= static_cast<Real>(count);

    return SurfaceStats{std::sqrt(var), std::sqrt(ms_slope)};
}

}  // namespace rsnpe::surface
