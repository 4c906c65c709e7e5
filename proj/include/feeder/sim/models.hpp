#pragma once

// Stochastic models of the feeder's surroundings: the cellular network, the
// food hopper behind the servo gate, the ultrasonic ranger, and the power
// supply. Each model owns its own seeded random stream.

#include <cstdint>
#include <optional>
#include <vector>

#include "feeder/domain.hpp"
#include "feeder/sim/rng.hpp"

namespace feeder::sim {

// ---------------------------------------------------------------------------
// GSM network

struct GsmNetworkParams {
    double delivery_probability = 0.98;
    // Per-hop latency: normal, truncated to [min, max] by resampling.
    double latency_mean_ms = 4000.0;
    double latency_sd_ms = 600.0;
    double latency_min_ms = 3000.0;
    double latency_max_ms = 5000.0;

    void validate() const;
};

struct DeliveryOutcome {
    bool delivered = false;
    Duration latency{0};
    std::uint64_t message_id = 0;
};

class GsmNetwork {
public:
    GsmNetwork(GsmNetworkParams params, std::uint64_t seed);

    /// One hop. Both the loss draw and the latency draw are always consumed
    /// so the stream stays aligned whatever the outcome.
    DeliveryOutcome submit();
    Duration sample_latency();

    const GsmNetworkParams& params() const noexcept { return params_; }
    std::uint64_t next_message_id() const noexcept { return next_id_; }
    std::uint64_t submitted() const noexcept { return next_id_ - 1; }
    std::uint64_t delivered() const noexcept { return delivered_; }
    std::uint64_t dropped() const noexcept { return dropped_; }

private:
    GsmNetworkParams params_;
    Rng rng_;
    std::uint64_t next_id_ = 1;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Hopper

struct HopperParams {
    double capacity_g = 2000.0;
    double initial_g = 2000.0;
    double flow_rate_gps = 25.0;
    double dispense_cv = 0.0267;
    // Grams per cm of fill height. Zero means capacity spread over the
    // usable container height (height minus sensor dead zone).
    double bulk_density_g_per_cm = 0.0;
};

/// Gravity-fed container. Mass is tracked in whole milligrams so that
/// contents + dispensed == initial + refilled holds exactly.
class Hopper {
public:
    Hopper(HopperParams params, double container_height_cm, double deadzone_cm, std::uint64_t seed);

    /// Gate open for `open_for`: nominal flow times duration, scaled by
    /// (1 + e) with e ~ N(0, cv) truncated at 3 sigma, capped at contents.
    DispenseResult dispense(Duration open_for, SimTime now);
    /// Adds up to `grams`, capped at capacity. Returns grams actually added.
    double refill(double grams);

    double contents_g() const noexcept { return contents_mg_ / 1000.0; }
    double capacity_g() const noexcept { return capacity_mg_ / 1000.0; }
    double bulk_density_g_per_cm() const noexcept { return density_; }
    double fill_height_cm() const noexcept;
    /// Distance from the sensor face down to the food surface.
    double surface_distance_cm() const noexcept;

    std::int64_t contents_mg() const noexcept { return contents_mg_; }
    std::int64_t initial_mg() const noexcept { return initial_mg_; }
    std::int64_t dispensed_mg() const noexcept { return dispensed_mg_; }
    std::int64_t refilled_mg() const noexcept { return refilled_mg_; }
    const HopperParams& params() const noexcept { return params_; }
    HopperParams& params() noexcept { return params_; }

private:
    HopperParams params_;
    double height_cm_;
    double density_;
    Rng rng_;
    std::int64_t capacity_mg_;
    std::int64_t contents_mg_;
    std::int64_t initial_mg_;
    std::int64_t dispensed_mg_ = 0;
    std::int64_t refilled_mg_ = 0;
};

// ---------------------------------------------------------------------------
// Ultrasonic ranger

struct UltrasonicParams {
    double temp_c = 25.0;
    double misalignment_deg = 0.0;
    bool noise_enabled = true;
    double noise_sd_cm = 0.3;      // up to 200 cm
    double far_noise_sd_cm = 2.0;  // at 400 cm
    double min_range_cm = 2.0;
    double max_range_cm = 400.0;
    double timeout_us = 38000.0;
};

/// Speed of sound in air, m/s; 346.3 at 25 C.
double actual_sound_speed_mps(double temp_c) noexcept;

/// 0 inside +-20 deg, rising linearly to 0.9 at 30 deg, then to 1 at 45 deg.
double echo_timeout_probability(double misalignment_deg) noexcept;

/// 0.3 cm up to 200 cm, growing linearly to 2.0 cm at 400 cm.
double ranging_noise_sd_cm(double distance_cm, const UltrasonicParams& params) noexcept;

class Ultrasonic {
public:
    Ultrasonic(UltrasonicParams params, std::uint64_t seed);

    /// Round-trip echo time in microseconds, or nullopt on timeout.
    std::optional<double> ping(double true_distance_cm);

    const UltrasonicParams& params() const noexcept { return params_; }
    UltrasonicParams& params() noexcept { return params_; }

private:
    UltrasonicParams params_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Power

struct PowerParams {
    double controller_ma = 45.0;
    double modem_idle_ma = 20.0;
    double sensor_idle_ma = 15.0;
    double servo_idle_ma = 10.0;
    double regulator_ma = 35.0;
    double modem_burst_ma = 1800.0;
    std::int64_t modem_burst_ms = 300;
    double servo_active_ma = 250.0;
    double sensor_ping_ma = 10.0;
    std::int64_t sensor_ping_ms = 50;
    double rail_voltage_v = 5.0;
    double battery_voltage_v = 12.0;
    double battery_capacity_mah = 1600.0;
    double converter_efficiency = 0.85;

    double idle_ma() const noexcept {
        return controller_ma + modem_idle_ma + sensor_idle_ma + servo_idle_ma + regulator_ma;
    }
    /// Battery-side charge per unit of rail-side charge.
    double battery_per_rail() const noexcept {
        return rail_voltage_v / (converter_efficiency * battery_voltage_v);
    }
};

struct PowerSample {
    SimTime at{0};
    double current_ma = 0.0;
    bool operator==(const PowerSample&) const = default;
};

struct EnergyUse {
    double rail_mah = 0.0;
    double battery_mah = 0.0;
};

/// Piecewise-constant rail current: the idle baseline plus any bursts in
/// progress. Integration is incremental; every change point is kept so
/// past windows can be integrated exactly.
class PowerModel {
public:
    PowerModel(PowerParams params, SimTime start);

    /// A burst may not start before the integration front.
    void add_burst(SimTime start, Duration length, double extra_ma);
    void advance(SimTime t);

    /// Change points produced since the previous call.
    std::vector<PowerSample> take_new_samples();
    const std::vector<PowerSample>& samples() const noexcept { return samples_; }

    double current_ma() const noexcept { return current_; }
    SimTime integrated_to() const noexcept { return front_; }

    /// Requires start <= t0 <= t1 <= integrated_to().
    EnergyUse integrate(SimTime t0, SimTime t1) const;

    double battery_used_mah() const noexcept { return battery_used_mah_at(front_); }
    double battery_used_mah_at(SimTime t) const;
    double battery_pct() const noexcept { return battery_pct_at(front_); }
    double battery_pct_at(SimTime t) const;

    void recharge();
    void set_powered(bool on);
    bool powered() const noexcept { return powered_; }

    const PowerParams& params() const noexcept { return params_; }
    /// Hours a full battery lasts at the idle baseline.
    double idle_endurance_hours() const noexcept;

private:
    struct Burst {
        SimTime start;
        SimTime end;
        double ma;
    };
    struct Checkpoint {
        SimTime at;
        double cumulative_ma_ms;  // rail charge up to `at`
        double current_after;
    };

    double current_at(SimTime t) const noexcept;
    double cumulative_at(SimTime t) const;
    void mark(SimTime at);

    PowerParams params_;
    SimTime start_;
    SimTime front_;
    double cumulative_ = 0.0;
    double current_ = 0.0;
    bool powered_ = true;
    std::vector<Burst> active_;
    std::vector<Checkpoint> checkpoints_;
    std::vector<PowerSample> samples_;
    std::size_t reported_ = 0;
    std::vector<std::pair<SimTime, double>> recharges_;  // (time, cumulative at time)
};

}  // namespace feeder::sim
