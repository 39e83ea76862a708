// rng.hpp — deterministic random streams (SplitMix64) used for shot noise and
// reproducible test fixtures. Outputs are bit-identical across platforms.

#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace pntomo {

// 64-bit FNV-1a; stable label hashing for noise-stream keys.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in (0, 1]
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double next_in(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
    }

    // standard normal via Box-Muller
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // index in [0, m)
    std::uint64_t next_index(std::uint64_t m) { return next_u64() % m; }

private:
    std::uint64_t state_;
};

// Combines a run seed with a label hash into one stream key. Each distinct
// (seed, label) pair gets an independent stream regardless of evaluation order.
inline std::uint64_t stream_key(std::uint64_t seed, std::string_view label) {
    SplitMix64 mix(seed ^ (fnv1a64(label) + 0x9E3779B97F4A7C15ull));
    return mix.next_u64();
}

} // namespace pntomo
