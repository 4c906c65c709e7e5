#pragma once

#include <cstdint>
#include <random>

namespace feeder::sim {

/// splitmix64 step; used to derive independent stream seeds from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Seeded random source whose output is identical on every platform:
/// mt19937_64 bits are converted here rather than through the
/// implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform() < p; }
    /// Standard normal (Marsaglia polar method, one variate per call).
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Normal restricted to [lo, hi] by resampling.
    double truncated_normal(double mean, double sd, double lo, double hi);

private:
    std::mt19937_64 engine_;
};

}  // namespace feeder::sim
