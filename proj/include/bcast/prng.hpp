#pragma once

#include <cstdint>

namespace bcast {

// splitmix64 (Steele, Lea, Vigna): the one PRNG used by every generator,
// so that seeded instances are reproducible across platforms and across
// reimplementations. next() is the standard finalizer; below(m) draws
// uniformly from [0, m) by rejection, consuming one draw per attempt.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % bound);
        std::uint64_t draw;
        do {
            draw = next();
        } while (draw >= limit);
        return draw % bound;
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

} // namespace bcast
