#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace boostinf {

// splitmix64 step; used for seed derivation so that parallel substreams
// never share state with the base stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t s = base;
    std::uint64_t a = splitmix64(s);
    s ^= index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
    return splitmix64(s) ^ (a >> 1);
}

// Deterministic generator with hand-rolled distributions. The standard
// library's distribution objects are implementation-defined, which would
// break the byte-identical-rerun contract across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1) with 53 random bits
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Box-Muller, one value per call; u1 in (0, 1]
    double normal() {
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // chi distribution with integer degrees of freedom
    double chi(int w) {
        double s = 0.0;
        for (int i = 0; i < w; ++i) {
            const double z = normal();
            s += z * z;
        }
        return std::sqrt(s);
    }

    // Fisher-Yates helper: uniform integer in [0, n), n >= 1, rejection method
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace boostinf
