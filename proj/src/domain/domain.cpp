#include "feeder/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace feeder {

namespace {

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) noexcept {
    return std::all_of(s.begin(), s.end(), is_digit);
}

std::optional<std::string> canonical_form(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == ' ' || c == '-') continue;
        out.push_back(c);
    }
    if (out.size() < 9 || out.size() > 16) return std::nullopt;
    if (out.front() != '+') return std::nullopt;
    if (!all_digits(std::string_view(out).substr(1))) return std::nullopt;
    return out;
}

}  // namespace

PhoneNumber PhoneNumber::parse(std::string_view raw) {
    auto canonical = canonical_form(raw);
    if (!canonical) throw MalformedNumber("malformed phone number: '" + std::string(raw) + "'");
    return PhoneNumber(std::move(*canonical));
}

std::optional<PhoneNumber> PhoneNumber::try_parse(std::string_view raw) noexcept {
    try {
        auto canonical = canonical_form(raw);
        if (!canonical) return std::nullopt;
        return PhoneNumber(std::move(*canonical));
    } catch (...) {
        return std::nullopt;
    }
}

PhoneNumber canonicalize_number(std::string_view raw) { return PhoneNumber::parse(raw); }

bool is_valid_sms_body(std::string_view body) noexcept {
    if (body.empty() || body.size() > kMaxSmsBody) return false;
    return std::all_of(body.begin(), body.end(), [](char c) { return c >= 0x20 && c <= 0x7E; });
}

SmsMessage make_sms(PhoneNumber from, PhoneNumber to, std::string body, SimTime sent_at) {
    if (!is_valid_sms_body(body)) {
        throw InvalidMessage(body.size() > kMaxSmsBody ? "SMS body longer than 160 characters"
                                                       : "SMS body empty or not printable ASCII");
    }
    return SmsMessage{std::move(from), std::move(to), std::move(body), sent_at};
}

std::string_view to_string(Verb verb) noexcept {
    switch (verb) {
    case Verb::Feed: return "FEED";
    case Verb::Status: return "STATUS";
    case Verb::Reset: return "RESET";
    }
    return "?";
}

bool is_valid_pin(std::string_view pin) noexcept {
    return pin.size() >= 4 && pin.size() <= 8 && all_digits(pin);
}

TimeOfDay TimeOfDay::parse(std::string_view text) {
    if (text.size() != 5 || text[2] != ':' || !is_digit(text[0]) || !is_digit(text[1]) ||
        !is_digit(text[3]) || !is_digit(text[4])) {
        throw InvalidConfig("bad time of day '" + std::string(text) + "', expected HH:MM");
    }
    int hh = (text[0] - '0') * 10 + (text[1] - '0');
    int mm = (text[3] - '0') * 10 + (text[4] - '0');
    if (hh > 23 || mm > 59) throw InvalidConfig("time of day out of range: '" + std::string(text) + "'");
    return TimeOfDay{hh * 60 + mm};
}

std::string TimeOfDay::str() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

std::string format_hhmm(SimTime at) {
    auto within_day = at.count() % kDay.count();
    if (within_day < 0) within_day += kDay.count();
    return TimeOfDay{static_cast<int>(within_day / 60000)}.str();
}

void FeederConfig::validate() const {
    if (!is_valid_pin(pin)) throw InvalidConfig("pin must be 4-8 decimal digits");
    if (authorized.empty() || authorized.size() > 10)
        throw InvalidConfig("authorized numbers must hold 1..10 entries");
    if (default_portion_g < kMinPortionG || default_portion_g > kMaxPortionG)
        throw InvalidConfig("default_portion_g must be within 5..200");
    if (schedule.size() > 8) throw InvalidConfig("at most 8 schedule entries");
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (!(schedule[i - 1] < schedule[i]))
            throw InvalidConfig("schedule entries must be strictly increasing");
    }
    if (food_check_period_s <= 0) throw InvalidConfig("food_check_period_s must be positive");
    if (!(low_level_threshold_pct > 0.0 && low_level_threshold_pct < 100.0))
        throw InvalidConfig("low_level_threshold_pct must be in (0, 100)");
    if (!(alert_hysteresis_pct >= 0.0)) throw InvalidConfig("alert_hysteresis_pct must be >= 0");
    if (!(sensor_deadzone_cm > 0.0 && sensor_deadzone_cm < container_height_cm &&
          container_height_cm <= 400.0))
        throw InvalidConfig("require 0 < sensor_deadzone_cm < container_height_cm <= 400");
    if (!(assumed_sound_speed_mps > 0.0)) throw InvalidConfig("assumed_sound_speed_mps must be positive");
    if (!(dispense_rate_gps > 0.0)) throw InvalidConfig("dispense_rate_gps must be positive");
}

FeederConfig default_feeder_config() {
    FeederConfig config;
    config.authorized = {PhoneNumber::parse("+8801712345678"), PhoneNumber::parse("+8801812345678")};
    config.schedule = {TimeOfDay::parse("08:00"), TimeOfDay::parse("14:00"), TimeOfDay::parse("20:00")};
    return config;
}

double level_percent(double distance_cm, const FeederConfig& config) noexcept {
    const double span = config.container_height_cm - config.sensor_deadzone_cm;
    const double pct = 100.0 * (config.container_height_cm - distance_cm) / span;
    return std::clamp(pct, 0.0, 100.0);
}

double ranging_distance_cm(double echo_time_us, double sound_speed_mps) noexcept {
    // us * m/s = 1e-6 m; halve for the round trip; 1e-4 converts to cm.
    return echo_time_us * sound_speed_mps / 2.0 * 1e-4;
}

ServoCommandValue ServoCommandValue::from_pwm(int pwm) {
    if (pwm < 0 || pwm > kMaxPwm) throw std::out_of_range("pwm must be within 0..255");
    return ServoCommandValue(pwm);
}

ServoCommandValue ServoCommandValue::from_angle(double angle_deg) {
    return ServoCommandValue(pwm_from_angle(angle_deg));
}

int pwm_from_angle(double angle_deg) noexcept {
    const double clamped = std::clamp(angle_deg, 0.0, ServoCommandValue::kMaxAngleDeg);
    return static_cast<int>(std::lround(clamped / ServoCommandValue::kMaxAngleDeg * ServoCommandValue::kMaxPwm));
}

ServoCommandValue servo_open_value() noexcept { return ServoCommandValue::from_angle(180.0); }

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::SmsIn: return "SMS_IN";
    case EventKind::SmsOut: return "SMS_OUT";
    case EventKind::FeedScheduled: return "FEED_SCHEDULED";
    case EventKind::FeedRemote: return "FEED_REMOTE";
    case EventKind::LevelCheck: return "LEVEL_CHECK";
    case EventKind::Alert: return "ALERT";
    case EventKind::ErrorReply: return "ERROR_REPLY";
    case EventKind::Reset: return "RESET";
    }
    return "?";
}

}  // namespace feeder
