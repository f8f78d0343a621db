#include <doctest.h>

#include <cmath>

#include "rsnpe/fft.hpp"

using namespace rsnpe;
using fft::Complex;

TEST_CASE("fft round trip and Parseval") {
    Rng rng(3);
    std::vector<Complex> data(256);
    for (auto& d : data) d = Complex(rng.normal(), rng.normal());
    const auto original = data;

    fft::dft(data, false);
    Real freq_energy = 0.0;
    for (const auto& d : data) freq_energy += std::norm(d);
    Real time_energy = 0.0;
    for (const auto& d : original) time_energy += std::norm(d);
    CHECK(freq_energy / data.size() == doctest::Approx(time_energy).epsilon(1e-10));

    fft::dft(data, true);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(std::abs(data[i] - original[i]) < 1e-10);
    }
}

TEST_CASE("fft matches naive dft on non-power-of-two length") {
    Rng rng(4);
    std::vector<Complex> a(48);
    for (auto& d : a) d = Complex(rng.normal(), rng.normal());
    auto b = a;

    // Single pure tone: bin k0 should capture all the energy.
    const int k0 = 5;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const Real ang = 2.0 * M_PI * k0 * static_cast<Real>(t) / static_cast<Real>(a.size());
        b[t] = Complex(std::cos(ang), std::sin(ang));
    }
    fft::dft(b, false);
    CHECK(std::abs(b[k0]) == doctest::Approx(48.0).epsilon(1e-10));
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (k != static_cast<std::size_t>(k0)) CHECK(std::abs(b[k]) < 1e-8);
    }
}

TEST_CASE("2d transform round trip") {
    Rng rng(5);
    const std::size_t n = 32;
    std::vector<Complex> grid(n * n);
    for (auto& g : grid) g = Complex(rng.normal(), rng.normal());
    const auto original = grid;
    fft::transform2d(grid, n, false);
    fft::transform2d(grid, n, true);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(grid[i] - original[i]) < 1e-10);
    }
}
