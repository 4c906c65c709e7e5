#include "feeder/sim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace feeder::sim {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

double Rng::normal() {
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::truncated_normal(double mean, double sd, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("truncated_normal: empty interval");
    if (sd <= 0.0) return std::clamp(mean, lo, hi);
    for (int i = 0; i < 1000; ++i) {
        const double x = normal(mean, sd);
        if (x >= lo && x <= hi) return x;
    }
    // Interval far out in a tail; fall back to a uniform draw inside it.
    return uniform(lo, hi);
}

}  // namespace feeder::sim
