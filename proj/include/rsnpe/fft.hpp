#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "rsnpe/common.hpp"

namespace rsnpe::fft {

using Complex = std::complex<Real>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 transform; n must be a power of two.
/// inverse=true applies the conjugate transform and divides by n.
void transform(Complex* data, std::size_t n, bool inverse);

/// DFT for arbitrary n: radix-2 when possible, O(n^2) fallback otherwise.
/// The fallback is only hit for non-power-of-two echo windows, which stay small.
void dft(std::vector<Complex>& data, bool inverse);

/// In-place 2-D transform of an n x n row-major grid; n must be a power of two.
void transform2d(std::vector<Complex>& grid, std::size_t n, bool inverse);

}  // namespace rsnpe::fft
