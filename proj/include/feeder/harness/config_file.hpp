#pragma once

// Flat key=value configuration. One assignment per line, '#' starts a
// comment, unknown keys are rejected. Every key has a default; a file only
// needs the keys it changes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "feeder/sim/world.hpp"

namespace feeder::harness {

struct TrialSettings {
    // SMS trial: gap before each command, uniform in [min, max] seconds.
    std::int64_t sms_spacing_min_s = 30;
    std::int64_t sms_spacing_max_s = 300;
    // Top the hopper back up before a command when it holds less than this.
    double sms_topup_below_g = 1000.0;
    // Quiet time after the last command so replies can land.
    std::int64_t settle_s = 60;

    std::int64_t dispense_spacing_s = 60;

    // Endurance: the owner refills to capacity every day at this time,
    // except for a gap of `refill_gap_days` starting on day
    // `refill_gap_start_day` (1-based), which lets the hopper run low.
    TimeOfDay refill_time{7 * 60};
    int refill_gap_start_day = 11;
    int refill_gap_days = 10;
    bool refills_enabled = true;

    bool operator==(const TrialSettings&) const = default;
};

struct SimConfig {
    sim::WorldParams world;
    TrialSettings trial;
};

SimConfig default_sim_config();

/// Starts from the defaults and applies each assignment. Throws
/// InvalidConfig with the line number on a bad key or value.
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);

/// Every key in a fixed order; doubles use the shortest form that reads
/// back to the same value, so parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const SimConfig& config);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_digest(const SimConfig& config);

std::vector<std::string> config_keys();

}  // namespace feeder::harness
