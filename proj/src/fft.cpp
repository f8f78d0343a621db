#include "rsnpe/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace rsnpe::fft {

void transform(Complex* data, std::size_t n, bool inverse) {
    if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const Real ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<Real>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = data[i + k];
                const Complex v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const Real inv = 1.0 / static_cast<Real>(n);
        for (std::size_t i = 0; i < n; ++i) data[i] *= inv;
    }
}

void dft(std::vector<Complex>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0) return;
    if (is_pow2(n)) {
        transform(data.data(), n, inverse);
        return;
    }
    std::vector<Complex> out(n, Complex(0.0, 0.0));
    const Real sign = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const Real ang = sign * M_PI * static_cast<Real>(k) * static_cast<Real>(t) /
                             static_cast<Real>(n);
            acc += data[t] * Complex(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    if (inverse) {
        const Real inv = 1.0 / static_cast<Real>(n);
        for (auto& v : out) v *= inv;
    }
    data = std::move(out);
}

void transform2d(std::vector<Complex>& grid, std::size_t n, bool inverse) {
    if (grid.size() != n * n) throw std::invalid_argument("fft2d: grid size mismatch");
    // Rows in parallel, then columns through a scratch buffer per chunk.
    parallel_chunks(n, 64, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t r = b; r < e; ++r) transform(grid.data() + r * n, n, inverse);
    });
    parallel_chunks(n, 64, [&](std::size_t b, std::size_t e, std::size_t) {
        std::vector<Complex> col(n);
        for (std::size_t c = b; c < e; ++c) {
            for (std::size_t r = 0; r < n; ++r) col[r] = grid[r * n + c];
            transform(col.data(), n, inverse);
            for (std::size_t r = 0; r < n; ++r) grid[r * n + c] = col[r];
        }
    });
}

}  // namespace rsnpe::fft
