#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gammalab {

// Deterministic random stream. The engine (mt19937_64) is bit-specified by the standard;
// the distributions below are hand-rolled because std::*_distribution is
// implementation-defined and would break cross-toolchain reproducibility.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1)
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // index in [0, n)
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
    }

    // standard normal via Box-Muller (always consumes exactly two uniforms)
    double gaussian() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 eng_;
};

// splitmix64 round, used to mix seed material
inline std::uint64_t mix_u64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream derived from (seed, salt_a, salt_b); streams for distinct salts do not
// overlap in any prefix-relevant way, which keeps results stable when more restarts are added.
inline RngStream make_stream(std::uint64_t seed, std::uint64_t salt_a, std::uint64_t salt_b = 0) {
    std::uint64_t s = mix_u64(seed ^ mix_u64(salt_a ^ mix_u64(salt_b)));
    return RngStream(s);
}

} // namespace gammalab
