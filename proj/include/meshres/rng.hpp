// Counter-based pseudo-random streams (splitmix64 core). A stream is fully
// determined by its key, so parallel dataset expansion stays reproducible.
#pragma once

#include <cstdint>

namespace meshres {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

    // Derives an independent stream from (seed, a, b), e.g. per
    // (surface index, copy index).
    static Rng keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        std::uint64_t k = splitmix64(seed);
        k = splitmix64(k ^ (a * 0x9e3779b97f4a7c15ULL + 1));
        k = splitmix64(k ^ (b * 0xc2b2ae3d27d4eb4fULL + 1));
        return Rng(k);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    // [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

} // namespace meshres
