#include <algorithm>
#include <cmath>

#include "feeder/sim/models.hpp"

namespace feeder::sim {

double actual_sound_speed_mps(double temp_c) noexcept { return 331.3 + 0.6 * temp_c; }

double echo_timeout_probability(double misalignment_deg) noexcept {
    const double a = std::abs(misalignment_deg);
    if (a <= 20.0) return 0.0;
    if (a <= 30.0) return 0.9 * (a - 20.0) / 10.0;
    if (a <= 45.0) return 0.9 + 0.1 * (a - 30.0) / 15.0;
    return 1.0;
}

double ranging_noise_sd_cm(double distance_cm, const UltrasonicParams& params) noexcept {
    if (distance_cm <= 200.0) return params.noise_sd_cm;
    const double frac = std::min(1.0, (distance_cm - 200.0) / 200.0);
    return params.noise_sd_cm + frac * (params.far_noise_sd_cm - params.noise_sd_cm);
}

Ultrasonic::Ultrasonic(UltrasonicParams params, std::uint64_t seed) : params_(params), rng_(seed) {}

std::optional<double> Ultrasonic::ping(double true_distance_cm) {
    const double lost = rng_.uniform();
    const double z = rng_.normal();
    if (true_distance_cm > params_.max_range_cm) return std::nullopt;
    if (lost < echo_timeout_probability(params_.misalignment_deg)) return std::nullopt;
    double measured = true_distance_cm;
    if (params_.noise_enabled) measured += z * ranging_noise_sd_cm(true_distance_cm, params_);
    // Targets inside the blind zone still read as the minimum range.
    measured = std::max(measured, params_.min_range_cm);
    // cm -> m, there and back, seconds -> microseconds.
    return 2.0 * measured * 1e-2 / actual_sound_speed_mps(params_.temp_c) * 1e6;
}

}  // namespace feeder::sim
