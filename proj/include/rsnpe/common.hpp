#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rsnpe {

using Real = double;

/// Raised when a configuration value violates a documented invariant.
/// The message carries the offending field path, e.g. "radar.n_samples".
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream-splitting: derive an independent seed for substream `stream` of `base`.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256** with explicit, libc-independent uniform/normal generation so
/// that identical seeds give bitwise-identical streams on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        cached_ = false;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    Real uniform01() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

    Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller on our own uniforms (cached pair).
    Real normal() {
        if (cached_) {
            cached_ = false;
            return cache_;
        }
        Real u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const Real u2 = uniform01();
        const Real r = std::sqrt(-2.0 * std::log(u1));
        const Real a = 2.0 * M_PI * u2;
        cache_ = r * std::sin(a);
        cached_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Lemire-style rejection to avoid modulo bias.
        uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        uint64_t l = static_cast<uint64_t>(m);
        if (l < n) {
            const uint64_t t = (0 - n) % n;
            while (l < t) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                l = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
    Real cache_ = 0.0;
    bool cached_ = false;
};

/// Runs fn(chunk_begin, chunk_end, chunk_index) over [0, n) in fixed-size
/// chunks. Chunk boundaries do not depend on the worker count, so callers can
/// merge per-chunk results in chunk order and stay bitwise deterministic.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t num_chunks(std::size_t n, std::size_t chunk) {
    return n == 0 ? 0 : (n + chunk - 1) / chunk;
}

/// FNV-1a 64-bit, used to fingerprint resolved configs in artifact sidecars.
inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(uint64_t v);

}  // namespace rsnpe
