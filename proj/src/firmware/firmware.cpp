#include "feeder/firmware.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace feeder::firmware {

namespace {

std::string percent_text(double pct) { return std::to_string(std::lround(pct)); }

std::string level_text(const DeviceState& state) {
    return state.last_level ? percent_text(state.last_level->level_pct) : std::string("?");
}

EventRecord record(DeviceState& state, SimTime now, EventKind kind, std::string detail) {
    EventRecord rec{now, state.next_seq++, kind, std::move(detail)};
    if (state.event_log.size() == kEventLogCapacity) state.event_log.pop_front();
    state.event_log.push_back(rec);
    return rec;
}

void emit_log(DeviceState& state, std::vector<Action>& actions, SimTime now, EventKind kind, std::string detail) {
    actions.emplace_back(Log{record(state, now, kind, std::move(detail))});
}

void send(DeviceState& state, std::vector<Action>& actions, SimTime now, const PhoneNumber& to, std::string body) {
    record(state, now, EventKind::SmsOut, "to " + to.str() + ": " + body);
    ++state.counters.sms_tx;
    actions.emplace_back(SendSms{to, std::move(body)});
}

void error_reply(DeviceState& state, std::vector<Action>& actions, SimTime now, const PhoneNumber& to,
                 std::string_view body) {
    ++state.counters.errors;
    emit_log(state, actions, now, EventKind::ErrorReply, std::string(body) + " -> " + to.str());
    send(state, actions, now, to, std::string(body));
}

void settle_servo(DeviceState& state, SimTime now) {
    if (state.servo_open && now >= state.servo_close_at) state.servo_open = false;
}

bool dispensing(const DeviceState& state, SimTime now) {
    return state.servo_open && now < state.servo_close_at;
}

void start_dispense(DeviceState& state, std::vector<Action>& actions, SimTime now, int portion_g) {
    const auto open_for = portion_to_open_duration(portion_g, state.config.dispense_rate_gps);
    state.servo_open = true;
    state.servo_close_at = now + open_for;
    actions.emplace_back(ServoSet{servo_open_value()});
    actions.emplace_back(ServoSetAfter{open_for, kServoClosed});
    actions.emplace_back(ScheduleWake{state.servo_close_at});
}

// First schedule instant at or after `now`.
void seek_schedule(DeviceState& state, SimTime now) {
    const auto& schedule = state.config.schedule;
    if (schedule.empty()) {
        state.next_feed_at.reset();
        return;
    }
    const SimTime day_start{now.count() - now.count() % kDay.count()};
    const Duration into_day = now - day_start;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i].offset() >= into_day) {
            state.next_schedule_index = i;
            state.next_feed_at = day_start + schedule[i].offset();
            return;
        }
    }
    state.next_schedule_index = 0;
    state.next_feed_at = day_start + kDay + schedule[0].offset();
}

void advance_schedule(DeviceState& state) {
    const auto& schedule = state.config.schedule;
    auto idx = state.next_schedule_index;
    SimTime day_start = *state.next_feed_at - schedule[idx].offset();
    if (++idx == schedule.size()) {
        idx = 0;
        day_start += kDay;
    }
    state.next_schedule_index = idx;
    state.next_feed_at = day_start + schedule[idx].offset();
}

void run_command(DeviceState& state, std::vector<Action>& actions, const ParsedCommand& cmd,
                 const PhoneNumber& sender, SimTime now) {
    switch (cmd.verb) {
    case Verb::Feed: {
        if (dispensing(state, now)) {
            error_reply(state, actions, now, sender, kReplyBusy);
            return;
        }
        const int portion = cmd.portion_g.value_or(state.config.default_portion_g);
        start_dispense(state, actions, now, portion);
        ++state.counters.feeds_remote;
        emit_log(state, actions, now, EventKind::FeedRemote,
                 "Remote Feed " + std::to_string(portion) + "g by " + sender.str());
        send(state, actions, now, sender,
             "OK: FED " + std::to_string(portion) + "g, LEVEL " + level_text(state) + "%");
        return;
    }
    case Verb::Status:
        send(state, actions, now, sender, compose_status(state));
        return;
    case Verb::Reset:
        state.alert_armed = true;
        state.counters = Counters{};
        emit_log(state, actions, now, EventKind::Reset, "Reset by " + sender.str());
        send(state, actions, now, sender, "OK: RESET");
        return;
    }
}

void check_monotonic(DeviceState& state, SimTime now) {
    if (now < state.last_seen) throw std::logic_error("firmware clock went backwards");
    state.last_seen = now;
}

}  // namespace

Step init(const FeederConfig& config, SimTime now) {
    config.validate();
    Step step;
    DeviceState& state = step.state;
    state.config = config;
    state.last_seen = now;
    state.alert_armed = true;
    state.servo_open = false;
    step.actions.emplace_back(ServoSet{kServoClosed});

    seek_schedule(state, now);
    if (state.next_feed_at) step.actions.emplace_back(ScheduleWake{*state.next_feed_at});

    state.next_check_at = now + std::chrono::seconds(config.food_check_period_s);
    step.actions.emplace_back(ScheduleWake{state.next_check_at});
    return step;
}

Step handle_sms(DeviceState state, const SmsMessage& msg, SimTime now) {
    check_monotonic(state, now);
    settle_servo(state, now);
    std::vector<Action> actions;
    ++state.counters.sms_rx;
    record(state, now, EventKind::SmsIn, "from " + msg.from.str() + ": " + msg.body);

    if (!state.config.authorized.contains(msg.from)) {
        // Unauthorized traffic gets the reply and nothing else.
        ++state.counters.errors;
        record(state, now, EventKind::ErrorReply, std::string(kReplyUnauthorized) + " -> " + msg.from.str());
        send(state, actions, now, msg.from, std::string(kReplyUnauthorized));
        return {std::move(state), std::move(actions)};
    }

    const auto parsed = parse_command(msg.body);
    if (const auto* cmd = std::get_if<ParsedCommand>(&parsed)) {
        if (cmd->pin != state.config.pin) {
            error_reply(state, actions, now, msg.from, kReplyInvalidPin);
        } else {
            run_command(state, actions, *cmd, msg.from, now);
        }
        return {std::move(state), std::move(actions)};
    }

    // Unparseable: only a sender who got the PIN right learns the command was bad.
    auto body = msg.body;
    std::string_view text = body;
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    const auto first_token = text.substr(0, text.find_first_of(" \t\r\n"));
    error_reply(state, actions, now, msg.from, first_token == state.config.pin ? kReplyBadCommand : kReplyInvalidPin);
    return {std::move(state), std::move(actions)};
}

Step tick(DeviceState state, SimTime now) {
    check_monotonic(state, now);
    settle_servo(state, now);
    std::vector<Action> actions;

    if (state.next_feed_at && now >= *state.next_feed_at) {
        if (dispensing(state, now)) {
            // A remote feed holds the gate; run the scheduled one when it closes.
            actions.emplace_back(ScheduleWake{state.servo_close_at});
        } else {
            int consumed = 0;
            while (*state.next_feed_at <= now) {
                advance_schedule(state);
                ++consumed;
            }
            start_dispense(state, actions, now, state.config.default_portion_g);
            ++state.counters.feeds_scheduled;
            std::string detail(kLogScheduledFeed);
            if (consumed > 1) detail += " (catch-up, " + std::to_string(consumed) + " entries)";
            emit_log(state, actions, now, EventKind::FeedScheduled, std::move(detail));
            actions.emplace_back(ScheduleWake{*state.next_feed_at});
        }
    }

    if (now >= state.next_check_at) {
        state.ranging_attempts = 1;
        actions.emplace_back(TriggerRanging{});
        state.next_check_at = now + std::chrono::seconds(state.config.food_check_period_s);
        actions.emplace_back(ScheduleWake{state.next_check_at});
    }
    return {std::move(state), std::move(actions)};
}

Step handle_echo(DeviceState state, std::optional<double> echo_time_us, SimTime now) {
    check_monotonic(state, now);
    settle_servo(state, now);
    std::vector<Action> actions;
    if (state.ranging_attempts == 0) return {std::move(state), std::move(actions)};

    const auto& cfg = state.config;
    std::optional<double> distance;
    if (echo_time_us) distance = ranging_distance_cm(*echo_time_us, cfg.assumed_sound_speed_mps);
    const bool in_band = distance && *distance >= cfg.sensor_deadzone_cm && *distance <= cfg.container_height_cm + 5.0;

    if (!in_band) {
        if (state.ranging_attempts == 1) {
            state.ranging_attempts = 2;
            actions.emplace_back(TriggerRanging{});
        } else {
            state.ranging_attempts = 0;
            ++state.counters.errors;
            char detail[96];
            if (distance)
                std::snprintf(detail, sizeof detail, "ERROR: Reading out of range (%.1f cm)", *distance);
            else
                std::snprintf(detail, sizeof detail, "ERROR: Sensor timeout");
            emit_log(state, actions, now, EventKind::LevelCheck, detail);
        }
        return {std::move(state), std::move(actions)};
    }

    state.ranging_attempts = 0;
    FoodLevelReading reading{*distance, level_percent(*distance, cfg), *echo_time_us, true, now};
    state.last_level = reading;
    char detail[64];
    std::snprintf(detail, sizeof detail, "Level %.1f%% (%.2f cm)", reading.level_pct, reading.distance_cm);
    emit_log(state, actions, now, EventKind::LevelCheck, detail);

    if (reading.level_pct < cfg.low_level_threshold_pct) {
        if (state.alert_armed) {
            const std::string body = std::string(kAlertLowFood) + " (" + percent_text(reading.level_pct) + "%)";
            emit_log(state, actions, now, EventKind::Alert, body);
            for (const auto& number : cfg.authorized) send(state, actions, now, number, body);
            state.alert_armed = cfg.alert_hysteresis_pct == 0.0;
        }
    } else if (!state.alert_armed && reading.level_pct >= cfg.low_level_threshold_pct + cfg.alert_hysteresis_pct) {
        state.alert_armed = true;
    }
    return {std::move(state), std::move(actions)};
}

DeviceState observe_battery(DeviceState state, double battery_pct) {
    state.battery_pct = battery_pct;
    return state;
}

std::string compose_status(const DeviceState& state) {
    std::string next = state.next_feed_at ? format_hhmm(*state.next_feed_at) : std::string("--:--");
    return "STATUS: LEVEL " + level_text(state) + "%, FEEDS S:" + std::to_string(state.counters.feeds_scheduled) +
           "/R:" + std::to_string(state.counters.feeds_remote) + ", NEXT " + next + ", BATT " +
           percent_text(state.battery_pct) + "%";
}

}  // namespace feeder::firmware
