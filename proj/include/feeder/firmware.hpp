#pragma once

// Feeder control logic as a pure step function.
//
// Every entry point takes the current DeviceState by value together with the
// triggering input and the current time, and returns the successor state plus
// the effects the surrounding hardware (real or simulated) must carry out.
// Nothing in here touches a clock, a port or a random source.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "feeder/domain.hpp"

namespace feeder::firmware {

inline constexpr std::size_t kEventLogCapacity = 1000;

inline constexpr std::string_view kReplyUnauthorized = "ERROR: Unauthorized Number";
inline constexpr std::string_view kReplyInvalidPin = "ERROR: Invalid PIN";
inline constexpr std::string_view kReplyBadCommand = "ERROR: BAD COMMAND";
inline constexpr std::string_view kReplyBusy = "ERROR: BUSY";
inline constexpr std::string_view kAlertLowFood = "ALERT: Low Food Level";
inline constexpr std::string_view kLogScheduledFeed = "Scheduled Feed";

struct Counters {
    std::uint32_t feeds_scheduled = 0;
    std::uint32_t feeds_remote = 0;
    std::uint32_t sms_rx = 0;
    std::uint32_t sms_tx = 0;
    std::uint32_t errors = 0;

    bool operator==(const Counters&) const = default;
};

struct DeviceState {
    FeederConfig config;
    bool servo_open = false;
    SimTime servo_close_at{0};
    std::optional<FoodLevelReading> last_level;  // most recent valid reading
    bool alert_armed = true;
    std::size_t next_schedule_index = 0;
    std::optional<SimTime> next_feed_at;  // absent with an empty schedule
    SimTime next_check_at{0};
    int ranging_attempts = 0;  // 0: no ranging outstanding
    double battery_pct = 100.0;
    Counters counters;
    std::deque<EventRecord> event_log;
    std::uint64_t next_seq = 0;
    SimTime last_seen{0};

    bool operator==(const DeviceState&) const = default;
};

struct SendSms {
    PhoneNumber to;
    std::string body;
    bool operator==(const SendSms&) const = default;
};
struct ServoSet {
    ServoCommandValue value;
    bool operator==(const ServoSet&) const = default;
};
struct ServoSetAfter {
    Duration delay{0};
    ServoCommandValue value;
    bool operator==(const ServoSetAfter&) const = default;
};
struct TriggerRanging {
    bool operator==(const TriggerRanging&) const = default;
};
struct ScheduleWake {
    SimTime at{0};
    bool operator==(const ScheduleWake&) const = default;
};
struct Log {
    EventRecord record;
    bool operator==(const Log&) const = default;
};

using Action = std::variant<SendSms, ServoSet, ServoSetAfter, TriggerRanging, ScheduleWake, Log>;

struct Step {
    DeviceState state;
    std::vector<Action> actions;
};

enum class ParseError { BadFormat, UnknownVerb, BadPortion };

std::string_view to_string(ParseError error) noexcept;

/// Grammar: <PIN> SP <VERB> [SP <GRAMS>]. Verb is case-insensitive and
/// surrounding whitespace is ignored; inner separators are single spaces.
std::variant<ParsedCommand, ParseError> parse_command(std::string_view body);

/// Open-gate time for a portion, rounded to the nearest 10 ms.
Duration portion_to_open_duration(int portion_g, double flow_rate_gps);

/// Validates the config and closes the gate. Throws InvalidConfig.
Step init(const FeederConfig& config, SimTime now);

Step handle_sms(DeviceState state, const SmsMessage& msg, SimTime now);
Step tick(DeviceState state, SimTime now);
/// An absent echo time is a sensor timeout.
Step handle_echo(DeviceState state, std::optional<double> echo_time_us, SimTime now);

/// Battery gauge input, only used for status replies.
DeviceState observe_battery(DeviceState state, double battery_pct);

std::string compose_status(const DeviceState& state);

}  // namespace feeder::firmware
