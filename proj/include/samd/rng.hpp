#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace samd::rng {

// Stateless 64-bit mixer (SplitMix64 finalizer). Used both to derive seeds
// and as the core of the counter-based stream below.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Folds a list of keys into a parent seed, one at a time. Every random
// quantity in the project is addressed by such a (seed, keys...) tuple so
// that replays are exact and streams never need to be stored.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
    for (std::uint64_t k : keys) {
        h = mix64(h ^ (k + 0x9e3779b97f4a7c15ULL));
    }
    return h;
}

// Small deterministic generator, cheap to construct at any derived seed.
// Uniforms come from the high 53 bits; normals from Box-Muller with the
// second value of each pair cached.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), n >= 1. Modulo bias is < n / 2^64.
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        constexpr double two_pi = 6.28318530717958647692528676655900577;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = two_pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace samd::rng
