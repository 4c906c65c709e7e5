#include "feeder/harness/trials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "feeder/sim/rng.hpp"
#include "feeder/sim/world.hpp"

namespace feeder::harness {

namespace {

using std::chrono::milliseconds;
using std::chrono::seconds;

constexpr double kMaMsPerMah = 3.6e6;
constexpr double kFoodPerCycleG = 60.0;
constexpr std::string_view kFedReply = "OK: FED";

sim::WorldParams world_params(const SimConfig& config, std::uint64_t seed) {
    sim::WorldParams p = config.world;
    p.seed = seed;
    return p;
}

PhoneNumber owner_of(const FeederConfig& config) {
    if (config.authorized.empty()) throw InvalidConfig("trial needs at least one authorized number");
    return *config.authorized.begin();
}

FoldContext context_for(std::string name, std::uint64_t n, const PhoneNumber& owner, const sim::World& world,
                        const SimConfig& config, std::uint64_t seed) {
    FoldContext ctx;
    ctx.trial_name = std::move(name);
    ctx.n = n;
    ctx.owner = owner.str();
    ctx.window_start = world.params().start;
    ctx.battery_per_rail = world.params().power.battery_per_rail();
    ctx.idle_endurance_h = world.power().idle_endurance_hours();
    ctx.seed = seed;
    ctx.config_digest = config_digest(config);
    return ctx;
}

TrialOutput finish(TrialKind kind, const sim::World& world, const FoldContext& ctx) {
    TrialOutput out;
    out.trace = world.trace().records();
    for (const auto& s : world.power().samples())
        if (s.at >= ctx.window_start && s.at < ctx.window_end) out.power_trace.push_back(s);
    out.report = fold_trace(kind, out.trace, ctx);
    return out;
}

// "from +123: body" / "to +123: body"
bool addressed(const std::string& detail, std::string_view direction, const std::string& number) {
    return detail.size() > direction.size() + number.size() + 2 && detail.starts_with(direction) &&
           detail.compare(direction.size(), number.size(), number) == 0 &&
           detail.compare(direction.size() + number.size(), 2, ": ") == 0;
}

std::string_view body_of(const std::string& detail) {
    const auto colon = detail.find(": ");
    return colon == std::string::npos ? std::string_view{} : std::string_view(detail).substr(colon + 2);
}

std::uint64_t catch_up_entries(const std::string& detail) {
    constexpr std::string_view tag = "(catch-up, ";
    const auto pos = detail.find(tag);
    if (pos == std::string::npos) return 1;
    std::uint64_t n = 1;
    const char* first = detail.data() + pos + tag.size();
    std::from_chars(first, detail.data() + detail.size(), n);
    return n;
}

double integrate_rail_mah(const std::vector<sim::TraceRecord>& trace, SimTime t0, SimTime t1) {
    double ma_ms = 0.0;
    std::optional<double> current;
    SimTime at = t0;
    for (const auto& r : trace) {
        if (r.kind != "POWER" || !r.current_ma) continue;
        if (r.at <= t0) {
            current = *r.current_ma;
            continue;
        }
        if (r.at >= t1) break;
        if (current) ma_ms += *current * static_cast<double>((r.at - at).count());
        at = r.at;
        current = *r.current_ma;
    }
    if (current && t1 > at) ma_ms += *current * static_cast<double>((t1 - at).count());
    return ma_ms / kMaMsPerMah;
}

}  // namespace

std::string_view to_string(TrialKind kind) noexcept {
    switch (kind) {
    case TrialKind::Sms: return "sms";
    case TrialKind::Dispense: return "dispense";
    case TrialKind::Endurance: return "endurance";
    case TrialKind::Power: return "power";
    }
    return "?";
}

TrialKind parse_trial_kind(std::string_view name) {
    for (auto k : {TrialKind::Sms, TrialKind::Dispense, TrialKind::Endurance, TrialKind::Power})
        if (to_string(k) == name) return k;
    throw InvalidConfig("unknown trial '" + std::string(name) + "' (sms, dispense, endurance, power)");
}

std::uint64_t expected_feed_count(const std::vector<TimeOfDay>& schedule, SimTime from, SimTime to) {
    if (to <= from) return 0;
    const auto day_ms = milliseconds(kDay).count();
    const auto first_day = from.count() / day_ms;
    const auto last_day = to.count() / day_ms;
    std::uint64_t n = 0;
    for (auto d = first_day; d <= last_day; ++d) {
        for (const auto& entry : schedule) {
            const SimTime t = SimTime(d * day_ms) + entry.offset();
            if (t >= from && t < to) ++n;
        }
    }
    return n;
}

TrialReport fold_trace(TrialKind kind, const std::vector<sim::TraceRecord>& trace, const FoldContext& ctx) {
    TrialReport r;
    r.trial_name = ctx.trial_name;
    r.n = ctx.n;
    r.seed = ctx.seed;
    r.config_digest = ctx.config_digest;
    r.sim_start_ms = ctx.window_start.count();
    r.sim_end_ms = ctx.window_end.count();
    r.expected_feeds = ctx.expected_feeds;
    r.idle_endurance_h = ctx.idle_endurance_h;

    struct Command {
        SimTime at;
        std::uint64_t msg_id;
    };
    std::vector<Command> commands;
    std::set<std::uint64_t> executed;
    std::set<std::uint64_t> received;
    std::vector<SimTime> fed_replies;
    std::set<std::string> alert_to;
    std::uint64_t covered = 0;

    for (const auto& rec : trace) {
        const auto& k = rec.kind;
        if (k == "PHONE_TX" && addressed(rec.detail, "from ", ctx.owner)) {
            commands.push_back({rec.at, rec.msg_id.value_or(0)});
        } else if (k == "FEED_REMOTE" && rec.msg_id) {
            executed.insert(*rec.msg_id);
        } else if (k == "SMS_IN" && rec.msg_id) {
            received.insert(*rec.msg_id);
        } else if (k == "PHONE_RX" && addressed(rec.detail, "to ", ctx.owner) &&
                   body_of(rec.detail).starts_with(kFedReply)) {
            fed_replies.push_back(rec.at);
        } else if (k == "DISPENSE" && rec.grams) {
            r.dispense_g.push_back(*rec.grams);
            r.dispense_duration_ms.push_back(rec.duration_ms.value_or(0));
            if (*rec.grams == 0.0) ++r.empty_feeds;
        } else if (k == "FEED_SCHEDULED") {
            ++r.scheduled_feeds;
            covered += catch_up_entries(rec.detail);
        } else if (k == "ALERT") {
            ++r.alerts_sent;
        } else if (k == "SMS_OUT" && body_of(rec.detail).starts_with("ALERT: Low Food Level")) {
            const auto& d = rec.detail;
            alert_to.insert(d.substr(3, d.find(": ") - 3));
        } else if (k == "NET_DROP" || k == "SMS_LOST") {
            ++r.messages_lost;
        } else if (k == "RECHARGE") {
            ++r.recharges;
        }
    }
    r.alert_recipients.assign(alert_to.begin(), alert_to.end());
    r.missed_feeds = ctx.expected_feeds > covered ? ctx.expected_feeds - covered : 0;

    // Pair each command with the first FED confirmation before the next one.
    std::vector<double> latencies;
    std::size_t reply = 0;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const auto& c = commands[i];
        const bool ok = kind == TrialKind::Power ? received.contains(c.msg_id) : executed.contains(c.msg_id);
        if (ok) ++r.success_count;
        const SimTime until = i + 1 < commands.size() ? commands[i + 1].at : SimTime::max();
        while (reply < fed_replies.size() && fed_replies[reply] < c.at) ++reply;
        if (reply < fed_replies.size() && fed_replies[reply] < until) {
            const double ms = static_cast<double>((fed_replies[reply] - c.at).count());
            latencies.push_back(ms);
            r.latency_histogram.add(ms);
            ++reply;
        }
    }
    r.confirmed_count = latencies.size();
    std::sort(latencies.begin(), latencies.end());
    if (!latencies.empty()) {
        r.latency_ms = {latencies.front(), nearest_rank(latencies, 0.5), nearest_rank(latencies, 0.9),
                        latencies.back()};
    }

    if (kind == TrialKind::Endurance) {
        r.n = ctx.expected_feeds;
        r.success_count = std::min(covered, ctx.expected_feeds);
    }

    if (!r.dispense_g.empty()) {
        const double n = static_cast<double>(r.dispense_g.size());
        const double mean = std::accumulate(r.dispense_g.begin(), r.dispense_g.end(), 0.0) / n;
        double ss = 0.0;
        for (double g : r.dispense_g) ss += (g - mean) * (g - mean);
        const double sd = r.dispense_g.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        r.dispense = {mean, mean > 0.0 ? sd / mean : 0.0};
    }

    r.energy_mah = integrate_rail_mah(trace, ctx.window_start, ctx.window_end);
    r.energy_battery_mah = r.energy_mah * ctx.battery_per_rail;
    return r;
}

TrialOutput run_sms_trial(const SimConfig& config, std::uint64_t n, std::uint64_t seed) {
    if (n < 1) throw InvalidConfig("sms trial needs n >= 1");
    sim::World world(world_params(config, seed));
    sim::Rng rng(sim::derive_seed(seed, 100));
    const PhoneNumber owner = owner_of(config.world.feeder);
    const std::string body = config.world.feeder.pin + " FEED";
    const auto& t = config.trial;

    for (std::uint64_t i = 0; i < n; ++i) {
        world.advance_by(milliseconds(rng.uniform_int(t.sms_spacing_min_s * 1000, t.sms_spacing_max_s * 1000)));
        if (world.hopper().contents_g() < t.sms_topup_below_g) world.refill(world.hopper().capacity_g());
        world.phone_send(owner, body);
    }
    world.advance_by(seconds(t.settle_s));

    FoldContext ctx = context_for("sms", n, owner, world, config, seed);
    ctx.window_end = world.now();
    ctx.expected_feeds = expected_feed_count(config.world.feeder.schedule, ctx.window_start, ctx.window_end);
    return finish(TrialKind::Sms, world, ctx);
}

TrialOutput run_dispense_trial(const SimConfig& config, std::uint64_t n, std::uint64_t seed) {
    if (n < 1) throw InvalidConfig("dispense trial needs n >= 1");
    if (config.world.hopper.initial_g < kFoodPerCycleG * static_cast<double>(n))
        throw InsufficientFood("hopper holds " + std::to_string(config.world.hopper.initial_g) + " g, need " +
                               std::to_string(kFoodPerCycleG * static_cast<double>(n)) + " g for " +
                               std::to_string(n) + " cycles");
    sim::WorldParams params = world_params(config, seed);
    params.network.delivery_probability = 1.0;
    sim::World world(params);
    const PhoneNumber owner = owner_of(config.world.feeder);
    const std::string body = config.world.feeder.pin + " FEED";

    for (std::uint64_t i = 0; i < n; ++i) {
        world.advance_by(seconds(config.trial.dispense_spacing_s));
        world.phone_send(owner, body);
    }
    world.advance_by(seconds(config.trial.settle_s));

    FoldContext ctx = context_for("dispense", n, owner, world, config, seed);
    ctx.window_end = world.now();
    ctx.expected_feeds = expected_feed_count(config.world.feeder.schedule, ctx.window_start, ctx.window_end);
    return finish(TrialKind::Dispense, world, ctx);
}

TrialOutput run_endurance(const SimConfig& config, std::uint64_t days, std::uint64_t seed) {
    if (days < 1) throw InvalidConfig("endurance trial needs days >= 1");
    sim::WorldParams params = world_params(config, seed);
    const auto day_ms = milliseconds(kDay).count();
    params.start = SimTime(params.start.count() / day_ms * day_ms);
    sim::World world(params);
    const SimTime start = params.start;
    const SimTime end = start + kDay * static_cast<std::int64_t>(days);
    const auto& t = config.trial;

    if (t.refills_enabled) {
        for (std::uint64_t d = 0; d < days; ++d) {
            const auto day = static_cast<int>(d) + 1;
            if (day >= t.refill_gap_start_day && day < t.refill_gap_start_day + t.refill_gap_days) continue;
            const SimTime at = start + kDay * static_cast<std::int64_t>(d) + t.refill_time.offset();
            if (at >= end) continue;
            world.advance_to(at);
            world.refill(world.hopper().capacity_g());
        }
    }
    world.advance_to(end - milliseconds(1));

    FoldContext ctx = context_for("endurance", 0, owner_of(config.world.feeder), world, config, seed);
    ctx.window_end = end;
    ctx.expected_feeds = expected_feed_count(config.world.feeder.schedule, start, end);
    return finish(TrialKind::Endurance, world, ctx);
}

std::vector<WorkloadItem> parse_workload(std::string_view script, const FeederConfig& config) {
    std::vector<WorkloadItem> items;
    if (script.empty() || script == "idle") return items;
    while (!script.empty()) {
        const auto comma = script.find(',');
        const auto item = script.substr(0, comma);
        script = comma == std::string_view::npos ? std::string_view{} : script.substr(comma + 1);

        const auto at = item.find('@');
        if (at == std::string_view::npos) throw InvalidConfig("workload item needs @seconds: " + std::string(item));
        std::string_view verb = item.substr(0, at);
        std::string_view grams;
        if (const auto colon = verb.find(':'); colon != std::string_view::npos) {
            grams = verb.substr(colon + 1);
            verb = verb.substr(0, colon);
        }
        WorkloadItem w;
        const auto when = item.substr(at + 1);
        auto [end, ec] = std::from_chars(when.data(), when.data() + when.size(), w.at_s);
        if (ec != std::errc{} || end != when.data() + when.size() || w.at_s < 0)
            throw InvalidConfig("bad workload time: " + std::string(item));
        if (verb == "feed")
            w.body = config.pin + " FEED";
        else if (verb == "status")
            w.body = config.pin + " STATUS";
        else if (verb == "reset")
            w.body = config.pin + " RESET";
        else
            throw InvalidConfig("unknown workload verb: " + std::string(verb));
        if (!grams.empty()) {
            if (verb != "feed") throw InvalidConfig("only feed takes grams: " + std::string(item));
            w.body += " " + std::string(grams);
        }
        items.push_back(std::move(w));
    }
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.at_s < b.at_s; });
    return items;
}

TrialOutput run_power_profile(const SimConfig& config, double duration_s, std::string_view workload,
                              std::uint64_t seed) {
    if (!(duration_s >= 0.0)) throw InvalidConfig("power profile duration must be >= 0");
    const auto items = parse_workload(workload, config.world.feeder);
    sim::WorldParams params = world_params(config, seed);
    params.network.delivery_probability = 1.0;
    sim::World world(params);
    const PhoneNumber owner = owner_of(config.world.feeder);
    const SimTime start = params.start;
    const SimTime end = start + milliseconds(std::llround(duration_s * 1000.0));

    for (const auto& item : items) {
        const SimTime at = start + seconds(item.at_s);
        if (at >= end) break;
        world.advance_to(at);
        world.phone_send(owner, item.body);
    }
    world.advance_to(end);

    FoldContext ctx = context_for("power", items.size(), owner, world, config, seed);
    ctx.window_end = end;
    ctx.n = static_cast<std::uint64_t>(
        std::count_if(items.begin(), items.end(), [&](const auto& w) { return start + seconds(w.at_s) < end; }));
    ctx.expected_feeds = expected_feed_count(config.world.feeder.schedule, start, end);
    return finish(TrialKind::Power, world, ctx);
}

}  // namespace feeder::harness
