#pragma once

// Deterministic randomness. Every stochastic decision in the library draws
// from an explicitly passed Rng, so a (config, seed) pair replays bit-exactly.
// mt19937_64 raw output is fully specified by the standard; the helpers below
// avoid std::uniform_*_distribution, whose output is implementation-defined.

#include <array>
#include <cstdint>
#include <cstring>
#include <random>

namespace dropnet {

using Rng = std::mt19937_64;

namespace detail {
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

inline Rng seeded_rng(uint64_t seed) {
    uint64_t s = seed;
    return Rng(detail::splitmix64(s));
}

/// Independent sub-stream of a master seed. Streams with distinct ids do not
/// overlap in practice; used to give each node its own mobility/protocol RNG.
inline Rng stream_rng(uint64_t master, uint64_t stream_id) {
    uint64_t s = master;
    uint64_t a = detail::splitmix64(s);
    s = a ^ stream_id;
    uint64_t b = detail::splitmix64(s);
    return Rng(b);
}

inline uint64_t next_u64(Rng& rng) { return rng(); }

/// Uniform in [0,1), 53 bits of precision.
inline double next_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double next_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * next_unit(rng);
}

/// Unbiased uniform in [0, n). n must be > 0.
inline uint32_t next_below(Rng& rng, uint32_t n) {
    const uint64_t span = n;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<uint32_t>(v % span);
}

inline void fill_bytes(Rng& rng, uint8_t* p, size_t n) {
    while (n >= 8) {
        uint64_t v = rng();
        std::memcpy(p, &v, 8);
        p += 8;
        n -= 8;
    }
    if (n > 0) {
        uint64_t v = rng();
        std::memcpy(p, &v, n);
    }
}

template <size_t N>
std::array<uint8_t, N> random_array(Rng& rng) {
    std::array<uint8_t, N> out{};
    fill_bytes(rng, out.data(), N);
    return out;
}

}  // namespace dropnet
