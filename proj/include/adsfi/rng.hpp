#pragma once

#include <cstdint>
#include <random>

namespace adsfi {

/// SplitMix64 output function (Steele, Lea & Flood). Bijective on 64-bit
/// words, so distinct inputs never collide.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives the seed of child `index` from `master` without replaying
/// siblings. Used for run seeds and per-run random streams.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Independent random streams carved out of one run seed.
enum class Stream : std::uint64_t {
    scenario = 1,
    sensor = 2,
    injector = 3,
    plan = 4,
};

constexpr std::uint64_t stream_seed(std::uint64_t run_seed, Stream s) noexcept {
    return mix_seed(run_seed, static_cast<std::uint64_t>(s));
}

/// Seeded random stream. The engine sequence is fixed by the standard; the
/// distributions are implemented here because the std:: ones are
/// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi]; returns lo when the interval is degenerate.
    double uniform(double lo, double hi) {
        if (!(hi > lo)) return lo;
        const double x = lo + (hi - lo) * uniform01();
        return x > hi ? hi : x;
    }

    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
        std::uint64_t x = 0;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal deviate (Marsaglia polar method).
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace adsfi
