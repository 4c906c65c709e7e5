#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "feeder/harness/config_file.hpp"
#include "feeder/harness/report.hpp"
#include "feeder/sim/trace.hpp"

namespace feeder::harness {

class InsufficientFood : public FeederError {
public:
    using FeederError::FeederError;
};

enum class TrialKind { Sms, Dispense, Endurance, Power };

std::string_view to_string(TrialKind kind) noexcept;
/// "sms", "dispense", "endurance", "power". Throws InvalidConfig.
TrialKind parse_trial_kind(std::string_view name);

struct TrialOutput {
    TrialReport report;
    std::vector<sim::TraceRecord> trace;
    // Rail current change points inside the trial window.
    std::vector<sim::PowerSample> power_trace;
};

/// n FEED commands from the first authorized number, spaced randomly.
/// Success means the device received and executed the command.
TrialOutput run_sms_trial(const SimConfig& config, std::uint64_t n, std::uint64_t seed);

/// n FEED cycles on a lossless network. Throws InsufficientFood when the
/// hopper starts with less than 60 g per cycle.
TrialOutput run_dispense_trial(const SimConfig& config, std::uint64_t n, std::uint64_t seed);

/// `days` whole days from midnight on the configured schedule, with the
/// scripted refill routine.
TrialOutput run_endurance(const SimConfig& config, std::uint64_t days, std::uint64_t seed);

struct WorkloadItem {
    std::int64_t at_s = 0;
    std::string body;  // SMS body sent by the owner
};

/// "idle" or a comma list of verb[:grams]@seconds, e.g. "feed@60,status@300".
std::vector<WorkloadItem> parse_workload(std::string_view script, const FeederConfig& config);

TrialOutput run_power_profile(const SimConfig& config, double duration_s, std::string_view workload,
                              std::uint64_t seed);

// Report folds. Each one reads nothing but the trace records and the
// context below.
struct FoldContext {
    std::string trial_name;
    std::uint64_t n = 0;
    std::string owner;  // canonical number commands come from
    SimTime window_start{0};
    SimTime window_end{0};
    std::uint64_t expected_feeds = 0;
    double battery_per_rail = 0.0;
    double idle_endurance_h = 0.0;
    std::uint64_t seed = 0;
    std::string config_digest;
};

TrialReport fold_trace(TrialKind kind, const std::vector<sim::TraceRecord>& trace, const FoldContext& ctx);

/// Schedule entries falling in [from, to).
std::uint64_t expected_feed_count(const std::vector<TimeOfDay>& schedule, SimTime from, SimTime to);

}  // namespace feeder::harness
