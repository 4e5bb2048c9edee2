#pragma once

#include <cmath>
#include <cstdint>

namespace evflow {

/**
 * Counter-based deterministic random generator (splitmix64 finalizer over
 * seed + counter * golden gamma). Any draw is addressable by (seed, counter),
 * so values are reproducible regardless of evaluation order or thread count.
 */
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Derive an independent sub-seed for a named stream.
    static std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
        return mix(seed ^ mix(tag + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return mix(seed_ + counter * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform in [0, 1).
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform_pos(std::uint64_t counter) const {
        return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; draw index `counter` consumes two
    /// uniform counters so consecutive indices are independent.
    double normal(std::uint64_t counter) const {
        const double u1 = uniform_pos(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

/// Sequential convenience wrapper over CounterRng.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return rng_.uniform(next_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return rng_.normal(next_++); }
    std::uint64_t bits() { return rng_.bits(next_++); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

} // namespace evflow
