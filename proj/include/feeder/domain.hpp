#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace feeder {

// Simulation time is measured from the simulation epoch, which is day 0 at
// 00:00 device-local time.
using SimTime = std::chrono::milliseconds;
using Duration = std::chrono::milliseconds;

inline constexpr Duration kDay = std::chrono::hours(24);

class FeederError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedNumber : public FeederError {
public:
    using FeederError::FeederError;
};

class InvalidConfig : public FeederError {
public:
    using FeederError::FeederError;
};

class InvalidMessage : public FeederError {
public:
    using FeederError::FeederError;
};

/// An international phone number in canonical form: '+' followed by 8..15
/// decimal digits, no separators.
class PhoneNumber {
public:
    /// Strips spaces and dashes, then validates. Throws MalformedNumber.
    static PhoneNumber parse(std::string_view raw);
    static std::optional<PhoneNumber> try_parse(std::string_view raw) noexcept;

    const std::string& str() const noexcept { return value_; }

    auto operator<=>(const PhoneNumber&) const = default;
    bool operator==(const PhoneNumber&) const = default;

private:
    explicit PhoneNumber(std::string canonical) : value_(std::move(canonical)) {}
    std::string value_;
};

PhoneNumber canonicalize_number(std::string_view raw);

inline constexpr std::size_t kMaxSmsBody = 160;

/// Printable ASCII only, 1..160 characters.
bool is_valid_sms_body(std::string_view body) noexcept;

struct SmsMessage {
    PhoneNumber from;
    PhoneNumber to;
    std::string body;
    SimTime sent_at{0};

    bool operator==(const SmsMessage&) const = default;
};

/// Throws InvalidMessage when the body violates the SMS invariant.
SmsMessage make_sms(PhoneNumber from, PhoneNumber to, std::string body, SimTime sent_at);

enum class Verb { Feed, Status, Reset };

std::string_view to_string(Verb verb) noexcept;

struct ParsedCommand {
    std::string pin;
    Verb verb{Verb::Status};
    std::optional<int> portion_g;  // FEED only

    bool operator==(const ParsedCommand&) const = default;
};

inline constexpr int kMinPortionG = 5;
inline constexpr int kMaxPortionG = 200;

bool is_valid_pin(std::string_view pin) noexcept;

struct TimeOfDay {
    int minutes = 0;  // 0..1439

    /// "HH:MM", 24-hour. Throws InvalidConfig.
    static TimeOfDay parse(std::string_view text);
    std::string str() const;
    Duration offset() const { return std::chrono::minutes(minutes); }

    auto operator<=>(const TimeOfDay&) const = default;
};

/// Formats the time-of-day part of a simulation instant as HH:MM.
std::string format_hhmm(SimTime at);

struct FeederConfig {
    std::string pin = "1234";
    std::set<PhoneNumber> authorized;
    int default_portion_g = 50;
    std::vector<TimeOfDay> schedule;
    std::int64_t food_check_period_s = 1800;
    double low_level_threshold_pct = 20.0;
    // Re-arm margin above the threshold. Zero alerts on every low reading.
    double alert_hysteresis_pct = 10.0;
    double container_height_cm = 30.0;
    double sensor_deadzone_cm = 2.0;
    double assumed_sound_speed_mps = 346.3;
    // Gate flow calibration used to turn grams into an open duration.
    double dispense_rate_gps = 25.0;

    /// Throws InvalidConfig naming the first violated constraint.
    void validate() const;

    bool operator==(const FeederConfig&) const = default;
};

/// Pet feeder defaults: PIN 1234, two authorized numbers, three meals a day.
FeederConfig default_feeder_config();

struct FoodLevelReading {
    double distance_cm = 0.0;
    double level_pct = 0.0;
    double echo_time_us = 0.0;
    bool valid = false;
    SimTime taken_at{0};

    bool operator==(const FoodLevelReading&) const = default;
};

/// Linear map of surface distance to fill percentage, clamped to [0, 100].
double level_percent(double distance_cm, const FeederConfig& config) noexcept;

/// Echo ranging: half the round-trip time multiplied by the speed of sound.
double ranging_distance_cm(double echo_time_us, double sound_speed_mps) noexcept;

/// Servo command in abstract PWM units 0..255 mapped linearly onto 0..180 deg.
class ServoCommandValue {
public:
    static constexpr int kMaxPwm = 255;
    static constexpr double kMaxAngleDeg = 180.0;

    constexpr ServoCommandValue() = default;
    /// Throws std::out_of_range outside 0..255.
    static ServoCommandValue from_pwm(int pwm);
    /// Nearest PWM step for an angle in [0, 180].
    static ServoCommandValue from_angle(double angle_deg);

    constexpr int pwm() const noexcept { return pwm_; }
    constexpr double angle_deg() const noexcept {
        return static_cast<double>(pwm_) / kMaxPwm * kMaxAngleDeg;
    }

    bool operator==(const ServoCommandValue&) const = default;

private:
    constexpr explicit ServoCommandValue(int pwm) : pwm_(pwm) {}
    int pwm_ = 0;
};

int pwm_from_angle(double angle_deg) noexcept;

inline constexpr ServoCommandValue kServoClosed{};
ServoCommandValue servo_open_value() noexcept;

struct DispenseResult {
    double requested_g = 0.0;
    double dispensed_g = 0.0;
    Duration duration{0};
    SimTime completed_at{0};

    bool operator==(const DispenseResult&) const = default;
};

enum class EventKind { SmsIn, SmsOut, FeedScheduled, FeedRemote, LevelCheck, Alert, ErrorReply, Reset };

std::string_view to_string(EventKind kind) noexcept;

struct EventRecord {
    SimTime at{0};
    std::uint64_t seq = 0;
    EventKind kind{EventKind::LevelCheck};
    std::string detail;

    bool operator==(const EventRecord&) const = default;
};

}  // namespace feeder
