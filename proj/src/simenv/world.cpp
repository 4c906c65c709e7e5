#include "feeder/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace feeder::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string servo_detail(ServoCommandValue v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s (pwm %d, %.1f deg)", v == kServoClosed ? "closed" : "open", v.pwm(),
                  v.angle_deg());
    return buf;
}

}  // namespace

World::World(WorldParams params)
    : params_(std::move(params)),
      clock_(params_.start),
      network_(params_.network, derive_seed(params_.seed, 1)),
      hopper_(params_.hopper, params_.feeder.container_height_cm, params_.feeder.sensor_deadzone_cm,
              derive_seed(params_.seed, 2)),
      sensor_(params_.sensor, derive_seed(params_.seed, 3)),
      power_(params_.power, params_.start),
      modem_(params_.device_number),
      decoder_(params_.device_number),
      modem_free_at_(params_.start) {
    params_.network.validate();
    params_.feeder.validate();
    boot();
}

void World::boot() {
    const SimTime t = now();
    sync_power(t);
    modem_.set_unresponsive_commands(params_.modem_unresponsive_commands);
    modem_.set_time(t);

    hal::ModemInitializer init;
    std::string out = init.start();
    while (!init.ready()) {
        const std::string answer = modem_.device_write(out);
        std::optional<std::string> next;
        for (const auto& e : decoder_.feed(answer)) {
            if (auto n = init.on_event(e)) next = std::move(n);
        }
        if (next)
            out = std::move(*next);
        else if (!init.ready())
            out = init.on_timeout();  // throws once retries run out
    }
    modem_retries_ = init.retries();
    for (const auto& line : init.retry_log()) note("MODEM", line);
    note("MODEM", "ready: text mode, new messages pushed");

    eeprom_.save(hal::credentials_of(params_.feeder));
    FeederConfig config = params_.feeder;
    if (auto creds = eeprom_.load()) hal::apply_credentials(config, *creds);

    apply(firmware::init(config, t));
}

const std::vector<InboxEntry>* World::inbox(const PhoneNumber& number) const {
    auto it = inboxes_.find(number);
    return it == inboxes_.end() ? nullptr : &it->second;
}

void World::note(std::string kind, std::string detail, std::optional<std::uint64_t> msg_id) {
    TraceRecord r;
    r.at = now();
    r.kind = std::move(kind);
    r.detail = std::move(detail);
    r.msg_id = msg_id;
    trace_.append(std::move(r));
}

void World::sync_power(SimTime t) {
    power_.advance(t);
    for (const auto& s : power_.take_new_samples()) {
        TraceRecord r;
        r.at = s.at;
        r.kind = "POWER";
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.1f mA", s.current_ma);
        r.detail = buf;
        r.current_ma = s.current_ma;
        r.battery_pct = power_.battery_pct_at(s.at);
        trace_.append(std::move(r));
    }
}

void World::advance_to(SimTime t) {
    if (t < now()) throw SchedulingInPast("cannot advance the world backwards");
    for (;;) {
        const auto next = clock_.next_time();
        run_battery_until(next && *next <= t ? *next : t);
        auto e = clock_.pop_until(t);
        if (!e) break;
        sync_power(e->at);
        dispatch(*e);
        sync_power(now());
        check_battery();
    }
    clock_.settle_at(t);
    sync_power(t);
    check_battery();
}

void World::dispatch(SimEvent<WorldEvent>& event) {
    std::visit([this](auto& e) { on_event(e); }, event.payload);
}

void World::apply(firmware::Step step) {
    device_ = std::move(step.state);
    execute(step.actions);
}

void World::execute(const std::vector<firmware::Action>& actions) {
    const SimTime t = now();
    const auto& pp = params_.power;
    SimTime cursor = std::max(t, modem_free_at_) + params_.processing;
    bool sent = false;

    for (const auto& action : actions) {
        std::visit(overloaded{
                       [&](const firmware::SendSms& s) {
                           clock_.schedule(cursor, ev::DeviceTransmit{s.to, s.body});
                           cursor += Duration(pp.modem_burst_ms);
                           sent = true;
                       },
                       [&](const firmware::ServoSet& s) {
                           if (s.value == kServoClosed) {
                               if (gate_open_)
                                   close_gate();
                               else
                                   note("SERVO", servo_detail(s.value));
                           } else if (!gate_open_) {
                               gate_open_ = true;
                               gate_opened_at_ = t;
                               note("SERVO", servo_detail(s.value));
                           }
                       },
                       [&](const firmware::ServoSetAfter& s) {
                           clock_.schedule(t + s.delay, ev::ServoClose{s.value});
                           if (gate_open_) power_.add_burst(t, s.delay, pp.servo_active_ma);
                           cursor = std::max(cursor, t + s.delay + params_.processing);
                       },
                       [&](const firmware::TriggerRanging&) {
                           power_.add_burst(t, Duration(pp.sensor_ping_ms), pp.sensor_ping_ma);
                           const auto echo = sensor_.ping(hopper_.surface_distance_cm());
                           const double wait_us = echo ? *echo : params_.sensor.timeout_us;
                           const auto wait = Duration(std::max<std::int64_t>(
                               1, static_cast<std::int64_t>(std::ceil(wait_us / 1000.0))));
                           clock_.schedule(t + wait, ev::EchoReturn{echo});
                       },
                       [&](const firmware::ScheduleWake& w) { schedule_wake(w.at); },
                       [&](const firmware::Log& l) {
                           note(std::string(to_string(l.record.kind)), l.record.detail, current_msg_id_);
                       },
                   },
                   action);
    }
    if (sent) modem_free_at_ = cursor;
}

void World::schedule_wake(SimTime at) {
    at = std::max(at, now());
    if (pending_wakes_.insert(at).second) clock_.schedule(at, ev::FirmwareWake{});
}

void World::close_gate() {
    const SimTime t = now();
    auto result = hopper_.dispense(t - gate_opened_at_, t);
    gate_open_ = false;
    note("SERVO", servo_detail(kServoClosed));
    TraceRecord r;
    r.at = t;
    r.kind = "DISPENSE";
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.2f g in %lld ms", result.dispensed_g,
                  static_cast<long long>(result.duration.count()));
    r.detail = buf;
    r.grams = result.dispensed_g;
    r.duration_ms = result.duration.count();
    trace_.append(std::move(r));
    dispenses_.push_back(result);
}

void World::on_event(ev::FirmwareWake&) {
    pending_wakes_.erase(now());
    if (!power_.powered()) return;
    apply(firmware::tick(std::move(device_), now()));
}

void World::on_event(ev::ServoClose& e) {
    if (e.value == kServoClosed && gate_open_) close_gate();
}

void World::on_event(ev::EchoReturn& e) {
    if (!power_.powered()) return;
    apply(firmware::handle_echo(std::move(device_), e.echo_time_us, now()));
}

void World::on_event(ev::DeliverToDevice& e) {
    if (!power_.powered()) {
        note("SMS_LOST", "device off: from " + e.msg.from.str() + ": " + e.msg.body, e.msg_id);
        return;
    }
    power_.add_burst(now(), Duration(params_.power.modem_burst_ms), params_.power.modem_burst_ma);
    modem_.set_time(now());
    for (const auto& mev : decoder_.feed(modem_.deliver(e.msg))) {
        if (const auto* in = std::get_if<hal::event::IncomingSms>(&mev))
            handle_incoming(in->message, e.msg_id);
        else if (const auto* un = std::get_if<hal::event::Unparsed>(&mev))
            note("MODEM", "unparsed: " + un->line);
    }
}

void World::handle_incoming(const SmsMessage& msg, std::uint64_t msg_id) {
    note("SMS_IN", "from " + msg.from.str() + ": " + msg.body, msg_id);
    device_ = firmware::observe_battery(std::move(device_), power_.battery_pct());
    current_msg_id_ = msg_id;
    apply(firmware::handle_sms(std::move(device_), msg, now()));
    current_msg_id_.reset();
}

void World::on_event(ev::DeviceTransmit& e) {
    if (!power_.powered()) {
        note("SMS_LOST", "device off: to " + e.to.str() + ": " + e.body);
        return;
    }
    hal::SendSmsFrames frames;
    try {
        frames = hal::encode_send_sms(e.to, e.body);
    } catch (const hal::CodecError& err) {
        note("MODEM", std::string("encode failed: ") + err.what());
        return;
    }
    modem_.set_time(now());
    std::vector<SmsMessage> late_arrivals;
    auto collect = [&](const std::vector<hal::ModemEvent>& events, bool& prompt) {
        for (const auto& mev : events) {
            if (std::holds_alternative<hal::event::SendPrompt>(mev)) prompt = true;
            if (const auto* in = std::get_if<hal::event::IncomingSms>(&mev)) late_arrivals.push_back(in->message);
        }
    };
    bool prompt = false;
    collect(decoder_.feed(modem_.device_write(frames.command)), prompt);
    if (!prompt) {
        note("MODEM", "no prompt for AT+CMGS to " + e.to.str());
        return;
    }
    bool unused = false;
    collect(decoder_.feed(modem_.device_write(frames.payload)), unused);

    const Duration burst(params_.power.modem_burst_ms);
    for (auto& msg : modem_.take_outgoing()) {
        power_.add_burst(now(), burst, params_.power.modem_burst_ma);
        note("SMS_OUT", "to " + msg.to.str() + ": " + msg.body, network_.next_message_id());
        network_submit(msg, now() + burst);
    }
    for (const auto& msg : late_arrivals) handle_incoming(msg, 0);
}

void World::on_event(ev::DeliverToPhone& e) {
    inboxes_[e.msg.to].push_back(InboxEntry{e.msg, now(), e.msg_id});
    note("PHONE_RX", "to " + e.msg.to.str() + ": " + e.msg.body, e.msg_id);
}

DeliveryOutcome World::network_submit(const SmsMessage& msg, SimTime departure) {
    if (departure < now()) throw SchedulingInPast("message departs before the current simulation time");
    const DeliveryOutcome out = network_.submit();
    if (out.delivered) {
        const SimTime at = departure + out.latency;
        if (msg.to == params_.device_number)
            clock_.schedule(at, ev::DeliverToDevice{msg, out.message_id});
        else
            clock_.schedule(at, ev::DeliverToPhone{msg, out.message_id});
    } else {
        note("NET_DROP", "to " + msg.to.str() + ": " + msg.body, out.message_id);
    }
    return out;
}

std::uint64_t World::phone_send(const PhoneNumber& from, const std::string& body) {
    SmsMessage msg = make_sms(from, params_.device_number, body, now());
    inboxes_.try_emplace(from);
    note("PHONE_TX", "from " + from.str() + ": " + body, network_.next_message_id());
    return network_submit(msg, now()).message_id;
}

double World::refill(double grams) {
    const double added = hopper_.refill(grams);
    char buf[80];
    std::snprintf(buf, sizeof buf, "+%.1f g, now %.1f g", added, hopper_.contents_g());
    TraceRecord r;
    r.at = now();
    r.kind = "REFILL";
    r.detail = buf;
    r.grams = added;
    trace_.append(std::move(r));
    return added;
}

void World::recharge() {
    sync_power(now());
    power_.recharge();
    note("RECHARGE", "battery back to 100%");
    if (!power_.powered()) power_on();
}

void World::power_on() {
    power_.set_powered(true);
    sync_power(now());
    note("POWER_ON", "supply restored");
    apply(firmware::tick(std::move(device_), now()));
}

// Between events the draw only changes at burst edges, so the battery
// crossing is found by stepping at the current rate until it is reached.
void World::run_battery_until(SimTime limit) {
    const auto& pp = params_.power;
    while (power_.powered()) {
        const double floor_pct = std::max(0.0, params_.recharge_below_pct);
        const double left_mah = std::max(0.0, (power_.battery_pct() - floor_pct) / 100.0 * pp.battery_capacity_mah);
        const double per_ms = power_.current_ma() * pp.battery_per_rail() / 3.6e6;
        if (per_ms <= 0.0) return;
        const auto wait = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(left_mah / per_ms)));
        const SimTime at = std::max(now(), power_.integrated_to()) + Duration(wait);
        if (at > limit) return;
        clock_.settle_at(at);
        sync_power(at);
        check_battery();
    }
}

void World::check_battery() {
    if (!power_.powered()) return;
    const double pct = power_.battery_pct();
    if (params_.recharge_below_pct > 0.0 && pct < params_.recharge_below_pct) {
        recharge();
    } else if (pct <= 0.0) {
        power_.set_powered(false);
        if (gate_open_) close_gate();
        sync_power(now());
        note("POWER_OFF", "battery exhausted");
    }
}

}  // namespace feeder::sim
