#include "feeder/harness/config_file.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace feeder::harness {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (!s.empty()) {
        const auto comma = s.find(',');
        auto item = trim(s.substr(0, comma));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double to_double(std::string_view s) {
    double v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw InvalidConfig("not a number: " + std::string(s));
    return v;
}

std::int64_t to_int(std::string_view s) {
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw InvalidConfig("not an integer: " + std::string(s));
    return v;
}

bool to_bool(std::string_view s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw InvalidConfig("not a boolean: " + std::string(s));
}

struct Field {
    std::string_view key;
    std::function<std::string(const SimConfig&)> get;
    std::function<void(SimConfig&, std::string_view)> set;
};

// `acc` maps a config to the member it names.
template <class Acc>
Field dbl(std::string_view key, Acc acc) {
    return {key, [acc](const SimConfig& c) { return fmt_double(acc(const_cast<SimConfig&>(c))); },
            [acc](SimConfig& c, std::string_view v) { acc(c) = to_double(v); }};
}

template <class Acc>
Field integer(std::string_view key, Acc acc) {
    return {key, [acc](const SimConfig& c) { return std::to_string(acc(const_cast<SimConfig&>(c))); },
            [acc](SimConfig& c, std::string_view v) {
                acc(c) = static_cast<std::remove_reference_t<decltype(acc(c))>>(to_int(v));
            }};
}

template <class Acc>
Field boolean(std::string_view key, Acc acc) {
    return {key, [acc](const SimConfig& c) { return std::string(acc(const_cast<SimConfig&>(c)) ? "true" : "false"); },
            [acc](SimConfig& c, std::string_view v) { acc(c) = to_bool(v); }};
}

template <class Acc>
Field millis(std::string_view key, Acc acc) {
    return {key, [acc](const SimConfig& c) { return std::to_string(acc(const_cast<SimConfig&>(c)).count()); },
            [acc](SimConfig& c, std::string_view v) {
                using D = std::remove_reference_t<decltype(acc(c))>;
                acc(c) = D(std::chrono::milliseconds(to_int(v)));
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        // Firmware configuration.
        f.push_back({"pin", [](const SimConfig& c) { return c.world.feeder.pin; },
                     [](SimConfig& c, std::string_view v) { c.world.feeder.pin = std::string(v); }});
        f.push_back({"authorized",
                     [](const SimConfig& c) {
                         std::string out;
                         for (const auto& n : c.world.feeder.authorized) {
                             if (!out.empty()) out += ',';
                             out += n.str();
                         }
                         return out;
                     },
                     [](SimConfig& c, std::string_view v) {
                         c.world.feeder.authorized.clear();
                         for (auto item : split_list(v)) {
                             auto n = PhoneNumber::try_parse(item);
                             if (!n) throw InvalidConfig("bad authorized number: " + std::string(item));
                             c.world.feeder.authorized.insert(*n);
                         }
                     }});
        f.push_back(integer("default_portion_g", [](SimConfig& c) -> int& { return c.world.feeder.default_portion_g; }));
        f.push_back({"schedule",
                     [](const SimConfig& c) {
                         std::string out;
                         for (const auto& t : c.world.feeder.schedule) {
                             if (!out.empty()) out += ',';
                             out += t.str();
                         }
                         return out;
                     },
                     [](SimConfig& c, std::string_view v) {
                         c.world.feeder.schedule.clear();
                         for (auto item : split_list(v)) c.world.feeder.schedule.push_back(TimeOfDay::parse(item));
                     }});
        f.push_back(integer("food_check_period_s",
                            [](SimConfig& c) -> std::int64_t& { return c.world.feeder.food_check_period_s; }));
        f.push_back(dbl("low_level_threshold_pct", [](SimConfig& c) -> double& { return c.world.feeder.low_level_threshold_pct; }));
        f.push_back(dbl("alert_hysteresis_pct", [](SimConfig& c) -> double& { return c.world.feeder.alert_hysteresis_pct; }));
        f.push_back(dbl("container_height_cm", [](SimConfig& c) -> double& { return c.world.feeder.container_height_cm; }));
        f.push_back(dbl("sensor_deadzone_cm", [](SimConfig& c) -> double& { return c.world.feeder.sensor_deadzone_cm; }));
        f.push_back(dbl("assumed_sound_speed_mps", [](SimConfig& c) -> double& { return c.world.feeder.assumed_sound_speed_mps; }));
        f.push_back(dbl("dispense_rate_gps", [](SimConfig& c) -> double& { return c.world.feeder.dispense_rate_gps; }));

        // Device and world.
        f.push_back({"device_number", [](const SimConfig& c) { return c.world.device_number.str(); },
                     [](SimConfig& c, std::string_view v) {
                         auto n = PhoneNumber::try_parse(v);
                         if (!n) throw InvalidConfig("bad device_number: " + std::string(v));
                         c.world.device_number = *n;
                     }});
        f.push_back(millis("processing_ms", [](SimConfig& c) -> Duration& { return c.world.processing; }));
        f.push_back(dbl("recharge_below_pct", [](SimConfig& c) -> double& { return c.world.recharge_below_pct; }));
        f.push_back(millis("start_ms", [](SimConfig& c) -> SimTime& { return c.world.start; }));
        f.push_back(integer("modem_unresponsive_commands",
                            [](SimConfig& c) -> int& { return c.world.modem_unresponsive_commands; }));

        f.push_back(dbl("net.delivery_probability", [](SimConfig& c) -> double& { return c.world.network.delivery_probability; }));
        f.push_back(dbl("net.latency_mean_ms", [](SimConfig& c) -> double& { return c.world.network.latency_mean_ms; }));
        f.push_back(dbl("net.latency_sd_ms", [](SimConfig& c) -> double& { return c.world.network.latency_sd_ms; }));
        f.push_back(dbl("net.latency_min_ms", [](SimConfig& c) -> double& { return c.world.network.latency_min_ms; }));
        f.push_back(dbl("net.latency_max_ms", [](SimConfig& c) -> double& { return c.world.network.latency_max_ms; }));

        f.push_back(dbl("hopper.capacity_g", [](SimConfig& c) -> double& { return c.world.hopper.capacity_g; }));
        f.push_back(dbl("hopper.initial_g", [](SimConfig& c) -> double& { return c.world.hopper.initial_g; }));
        f.push_back(dbl("hopper.flow_rate_gps", [](SimConfig& c) -> double& { return c.world.hopper.flow_rate_gps; }));
        f.push_back(dbl("hopper.dispense_cv", [](SimConfig& c) -> double& { return c.world.hopper.dispense_cv; }));
        f.push_back(dbl("hopper.bulk_density_g_per_cm",
                        [](SimConfig& c) -> double& { return c.world.hopper.bulk_density_g_per_cm; }));

        f.push_back(dbl("sensor.temp_c", [](SimConfig& c) -> double& { return c.world.sensor.temp_c; }));
        f.push_back(dbl("sensor.misalignment_deg", [](SimConfig& c) -> double& { return c.world.sensor.misalignment_deg; }));
        f.push_back(boolean("sensor.noise_enabled", [](SimConfig& c) -> bool& { return c.world.sensor.noise_enabled; }));
        f.push_back(dbl("sensor.noise_sd_cm", [](SimConfig& c) -> double& { return c.world.sensor.noise_sd_cm; }));
        f.push_back(dbl("sensor.far_noise_sd_cm", [](SimConfig& c) -> double& { return c.world.sensor.far_noise_sd_cm; }));
        f.push_back(dbl("sensor.min_range_cm", [](SimConfig& c) -> double& { return c.world.sensor.min_range_cm; }));
        f.push_back(dbl("sensor.max_range_cm", [](SimConfig& c) -> double& { return c.world.sensor.max_range_cm; }));
        f.push_back(dbl("sensor.timeout_us", [](SimConfig& c) -> double& { return c.world.sensor.timeout_us; }));

        f.push_back(dbl("power.controller_ma", [](SimConfig& c) -> double& { return c.world.power.controller_ma; }));
        f.push_back(dbl("power.modem_idle_ma", [](SimConfig& c) -> double& { return c.world.power.modem_idle_ma; }));
        f.push_back(dbl("power.sensor_idle_ma", [](SimConfig& c) -> double& { return c.world.power.sensor_idle_ma; }));
        f.push_back(dbl("power.servo_idle_ma", [](SimConfig& c) -> double& { return c.world.power.servo_idle_ma; }));
        f.push_back(dbl("power.regulator_ma", [](SimConfig& c) -> double& { return c.world.power.regulator_ma; }));
        f.push_back(dbl("power.modem_burst_ma", [](SimConfig& c) -> double& { return c.world.power.modem_burst_ma; }));
        f.push_back(integer("power.modem_burst_ms", [](SimConfig& c) -> std::int64_t& { return c.world.power.modem_burst_ms; }));
        f.push_back(dbl("power.servo_active_ma", [](SimConfig& c) -> double& { return c.world.power.servo_active_ma; }));
        f.push_back(dbl("power.sensor_ping_ma", [](SimConfig& c) -> double& { return c.world.power.sensor_ping_ma; }));
        f.push_back(integer("power.sensor_ping_ms", [](SimConfig& c) -> std::int64_t& { return c.world.power.sensor_ping_ms; }));
        f.push_back(dbl("power.rail_voltage_v", [](SimConfig& c) -> double& { return c.world.power.rail_voltage_v; }));
        f.push_back(dbl("power.battery_voltage_v", [](SimConfig& c) -> double& { return c.world.power.battery_voltage_v; }));
        f.push_back(dbl("power.battery_capacity_mah", [](SimConfig& c) -> double& { return c.world.power.battery_capacity_mah; }));
        f.push_back(dbl("power.converter_efficiency", [](SimConfig& c) -> double& { return c.world.power.converter_efficiency; }));

        // Trial scripting.
        f.push_back(integer("trial.sms_spacing_min_s", [](SimConfig& c) -> std::int64_t& { return c.trial.sms_spacing_min_s; }));
        f.push_back(integer("trial.sms_spacing_max_s", [](SimConfig& c) -> std::int64_t& { return c.trial.sms_spacing_max_s; }));
        f.push_back(dbl("trial.sms_topup_below_g", [](SimConfig& c) -> double& { return c.trial.sms_topup_below_g; }));
        f.push_back(integer("trial.settle_s", [](SimConfig& c) -> std::int64_t& { return c.trial.settle_s; }));
        f.push_back(integer("trial.dispense_spacing_s", [](SimConfig& c) -> std::int64_t& { return c.trial.dispense_spacing_s; }));
        f.push_back({"trial.refill_time", [](const SimConfig& c) { return c.trial.refill_time.str(); },
                     [](SimConfig& c, std::string_view v) { c.trial.refill_time = TimeOfDay::parse(v); }});
        f.push_back(integer("trial.refill_gap_start_day", [](SimConfig& c) -> int& { return c.trial.refill_gap_start_day; }));
        f.push_back(integer("trial.refill_gap_days", [](SimConfig& c) -> int& { return c.trial.refill_gap_days; }));
        f.push_back(boolean("trial.refills_enabled", [](SimConfig& c) -> bool& { return c.trial.refills_enabled; }));
        return f;
    }();
    return table;
}

void validate(const SimConfig& c) {
    c.world.feeder.validate();
    c.world.network.validate();
    const auto& t = c.trial;
    if (t.sms_spacing_min_s < 0 || t.sms_spacing_max_s < t.sms_spacing_min_s)
        throw InvalidConfig("trial.sms_spacing_*: need 0 <= min <= max");
    if (t.settle_s < 0 || t.dispense_spacing_s <= 0) throw InvalidConfig("trial spacing must be positive");
    if (t.refill_gap_start_day < 1 || t.refill_gap_days < 0) throw InvalidConfig("trial.refill_gap_*: out of range");
    const auto& h = c.world.hopper;
    if (h.capacity_g <= 0 || h.initial_g < 0 || h.initial_g > h.capacity_g || h.flow_rate_gps <= 0 || h.dispense_cv < 0)
        throw InvalidConfig("hopper.*: out of range");
    const auto& p = c.world.power;
    if (p.battery_capacity_mah <= 0 || p.converter_efficiency <= 0 || p.converter_efficiency > 1 ||
        p.battery_voltage_v <= 0 || p.rail_voltage_v <= 0)
        throw InvalidConfig("power.*: out of range");
    if (c.world.processing.count() < 0) throw InvalidConfig("processing_ms must be >= 0");
}

}  // namespace

SimConfig default_sim_config() { return SimConfig{}; }

SimConfig parse_config(std::string_view text) {
    SimConfig c = default_sim_config();
    int lineno = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (eq == std::string_view::npos) throw InvalidConfig(where + "expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const Field* field = nullptr;
        for (const auto& f : fields())
            if (f.key == key) field = &f;
        if (!field) throw InvalidConfig(where + "unknown key '" + std::string(key) + "'");
        try {
            field->set(c, value);
        } catch (const FeederError& e) {
            throw InvalidConfig(where + std::string(key) + ": " + e.what());
        }
    }
    validate(c);
    return c;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const SimConfig& config) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += '=';
        out += f.get(config);
        out += '\n';
    }
    return out;
}

std::string config_digest(const SimConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.emplace_back(f.key);
    return keys;
}

}  // namespace feeder::harness
