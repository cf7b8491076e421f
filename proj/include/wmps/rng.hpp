#pragma once

#include <cstdint>
#include <random>

namespace wmps {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

/// Stream tags for the independent random streams of one trajectory.
enum class Stream : std::uint64_t { unitaries = 1, masks = 2, outcomes = 3 };

/// Counter-based seed derivation: each argument is folded in through one
/// SplitMix64 round, so distinct (master, group, trajectory, stream) tuples give
/// unrelated seeds regardless of how tasks are scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t group, std::uint64_t trajectory,
                                    std::uint64_t stream) {
    std::uint64_t h = splitmix64(master);
    h               = splitmix64(h ^ group);
    h               = splitmix64(h ^ (trajectory + 0x632be59bd9b4e019ULL));
    h               = splitmix64(h ^ (stream * 0x8cb92ba72f3d8dd7ULL));
    return h;
}

/// Random stream built on mt19937_64, with the real-valued draws defined here
/// rather than by <random> distributions so sequences are identical across
/// standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; one variate per call.
    double normal();

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 engine_;
};

} // namespace wmps
