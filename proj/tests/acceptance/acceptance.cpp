// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "feeder/firmware.hpp"
#include "feeder/hal.hpp"
#include "feeder/harness/config_file.hpp"
#include "feeder/harness/trials.hpp"
#include "feeder/sim/models.hpp"
#include "feeder/sim/rng.hpp"

using namespace feeder;
using namespace feeder::harness;

namespace {

// Pinned tolerances.
constexpr double kSmsSuccessMin = 0.95;
constexpr double kSmsLossMin = 0.015;
constexpr double kSmsLossMax = 0.025;
constexpr double kSmsRuntimeS = 10.0;
constexpr double kLatencyMinMs = 8000.0;
constexpr double kLatencyMaxMs = 12999.0;
constexpr double kDispenseMeanMin = 48.5;
constexpr double kDispenseMeanMax = 51.5;
constexpr double kDispenseCvMax = 0.04;
constexpr std::int64_t kPortionMs = 2000;
constexpr std::uint64_t kEnduranceFeeds = 90;
constexpr double kEnduranceRuntimeS = 30.0;
constexpr double kIdleMa = 125.0;
constexpr double kIdleHourMah = 125.0;
constexpr double kIdleHourTolMah = 0.1;
constexpr double kInversionTolCm = 0.05;
constexpr int kInversionSamples = 1000;
constexpr int kPropertyCases = 10000;
constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

template <class F>
auto timed(F f, double& seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    auto out = f();
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string ndjson(const std::vector<sim::TraceRecord>& trace) {
    std::string s;
    for (const auto& r : trace) s += sim::to_ndjson(r) + "\n";
    return s;
}

// Firmware state expecting an echo, in a container tall enough for the
// sensor's whole range.
firmware::DeviceState ranging_state() {
    FeederConfig cfg = default_feeder_config();
    cfg.container_height_cm = 400.0;
    auto state = firmware::init(cfg, SimTime(0)).state;
    state.ranging_attempts = 1;
    return state;
}

std::optional<double> firmware_distance(std::optional<double> echo_us) {
    const auto step = firmware::handle_echo(ranging_state(), echo_us, SimTime(0));
    if (!step.state.last_level) return std::nullopt;
    return step.state.last_level->distance_cm;
}

const PhoneNumber kDevice = PhoneNumber::parse("+8801900000000");

PhoneNumber random_number(sim::Rng& rng) {
    std::string s = "+";
    const auto n = rng.uniform_int(8, 15);
    for (int i = 0; i < n; ++i) s += static_cast<char>('0' + rng.uniform_int(0, 9));
    return PhoneNumber::parse(s);
}

std::string random_body(sim::Rng& rng) {
    std::string s;
    const auto n = rng.uniform_int(1, 160);
    for (int i = 0; i < n; ++i) s += static_cast<char>(rng.uniform_int(0x20, 0x7E));
    return s;
}

// Bodies an attacker would try: valid commands with the right PIN mixed
// with noise.
std::string attacker_body(sim::Rng& rng) {
    static const std::vector<std::string> common = {"1234 FEED", "1234 FEED 50", "1234 STATUS", "1234 RESET",
                                                    "0000 FEED"};
    if (rng.bernoulli(0.5)) return common[static_cast<std::size_t>(rng.uniform_int(0, 4))];
    return random_body(rng);
}

}  // namespace

int main() {
    const SimConfig config = default_sim_config();

    report("sms_success_rate", [&] {
        double t100 = 0, t10k = 0;
        const auto r100 = timed([&] { return run_sms_trial(config, 100, kSeed).report; }, t100);
        const auto r10k = timed([&] { return run_sms_trial(config, 10000, kSeed).report; }, t10k);
        const double success = static_cast<double>(r100.success_count) / 100.0;
        const double loss = 1.0 - static_cast<double>(r10k.success_count) / 10000.0;
        const bool ok = success >= kSmsSuccessMin && success <= 1.0 && loss >= kSmsLossMin && loss <= kSmsLossMax &&
                        t100 < kSmsRuntimeS && t10k < kSmsRuntimeS;
        return Outcome{ok, fmt("n=100 success %.1f%% in %.2f s; n=10000 loss %.2f%% in %.2f s", success * 100,
                               t100, loss * 100, t10k)};
    });

    report("response_latency", [&] {
        const auto r = run_sms_trial(config, 10000, kSeed).report;
        const auto& h = r.latency_histogram;
        const bool ok = r.confirmed_count > 0 && r.latency_ms.min >= kLatencyMinMs &&
                        r.latency_ms.max <= kLatencyMaxMs && h.below == 0 && h.above == 0 && h.unimodal();
        std::string bins;
        for (auto c : h.counts) bins += std::to_string(c) + " ";
        return Outcome{ok, fmt("%llu round trips, %.0f..%.0f ms, p50 %.0f ms, 1 s bins from 8 s: [%s]%s",
                               static_cast<unsigned long long>(r.confirmed_count), r.latency_ms.min,
                               r.latency_ms.max, r.latency_ms.p50, bins.c_str(),
                               h.unimodal() ? " unimodal" : " not unimodal")};
    });

    report("dispense_consistency", [&] {
        const auto r = run_dispense_trial(config, 30, kSeed).report;
        const bool durations = r.dispense_duration_ms.size() == 30 &&
                               std::all_of(r.dispense_duration_ms.begin(), r.dispense_duration_ms.end(),
                                           [](std::int64_t d) { return d == kPortionMs; });
        const bool ok = r.dispense_g.size() == 30 && r.dispense.mean_g >= kDispenseMeanMin &&
                        r.dispense.mean_g <= kDispenseMeanMax && r.dispense.cv <= kDispenseCvMax && durations;
        return Outcome{ok, fmt("%zu cycles, mean %.2f g, cv %.4f, durations %s", r.dispense_g.size(),
                               r.dispense.mean_g, r.dispense.cv, durations ? "all 2000 ms" : "off nominal")};
    });

    report("endurance", [&] {
        double secs = 0;
        const auto r = timed([&] { return run_endurance(config, 30, kSeed).report; }, secs);
        std::set<std::string> want;
        for (const auto& n : config.world.feeder.authorized) want.insert(n.str());
        const std::set<std::string> got(r.alert_recipients.begin(), r.alert_recipients.end());
        const bool ok = r.expected_feeds == kEnduranceFeeds && r.success_count == kEnduranceFeeds &&
                        r.scheduled_feeds == kEnduranceFeeds && r.missed_feeds == 0 && r.alerts_sent >= 1 &&
                        got == want && secs < kEnduranceRuntimeS;
        return Outcome{ok, fmt("%llu/%llu feeds, %llu missed, %llu alert(s) to %zu/%zu numbers, %.2f s",
                               static_cast<unsigned long long>(r.scheduled_feeds),
                               static_cast<unsigned long long>(r.expected_feeds),
                               static_cast<unsigned long long>(r.missed_feeds),
                               static_cast<unsigned long long>(r.alerts_sent), got.size(), want.size(), secs)};
    });

    report("power_profile", [&] {
        const auto quiet = run_power_profile(config, 600.0, "idle", kSeed);
        const bool flat = !quiet.power_trace.empty() &&
                          std::all_of(quiet.power_trace.begin(), quiet.power_trace.end(),
                                      [](const sim::PowerSample& s) { return s.current_ma == kIdleMa; });
        const auto hour = run_power_profile(config, 3600.0, "idle", kSeed).report;
        const bool hour_ok = std::abs(hour.energy_mah - kIdleHourMah) <= kIdleHourTolMah;

        const auto feed = run_power_profile(config, 600.0, "feed@60", kSeed);
        const auto& p = config.world.power;
        bool modem = false, servo = false;
        for (const auto& s : feed.power_trace) {
            double extra = s.current_ma - kIdleMa;
            if (extra >= p.modem_burst_ma) {
                modem = true;
                extra -= p.modem_burst_ma;
            }
            if (std::abs(extra - p.servo_active_ma) < 1e-9) servo = true;
        }
        return Outcome{flat && hour_ok && modem && servo,
                       fmt("idle trace %s 125 mA; 1 h idle %.4f mAh; feed shows modem spike %s, servo %s",
                           flat ? "exactly" : "not", hour.energy_mah, modem ? "yes" : "no", servo ? "yes" : "no")};
    });

    report("equation_conformance", [&] {
        int pwm_bad = 0;
        for (int pwm = 0; pwm <= 255; ++pwm) {
            const auto v = ServoCommandValue::from_pwm(pwm);
            if (ServoCommandValue::from_angle(v.angle_deg()).pwm() != pwm || pwm_from_angle(v.angle_deg()) != pwm)
                ++pwm_bad;
        }
        sim::UltrasonicParams up;
        up.temp_c = 25.0;
        up.noise_enabled = false;
        sim::Ultrasonic sensor(up, sim::derive_seed(kSeed, 3));
        sim::Rng rng(sim::derive_seed(kSeed, 200));
        double worst = 0.0;
        int missing = 0;
        for (int i = 0; i < kInversionSamples; ++i) {
            const double d = rng.uniform(2.0, 400.0);
            const auto got = firmware_distance(sensor.ping(d));
            if (!got)
                ++missing;
            else
                worst = std::max(worst, std::abs(*got - d));
        }
        const bool ok = pwm_bad == 0 && missing == 0 && worst <= kInversionTolCm;
        return Outcome{ok, fmt("servo round trip %d/256 exact; ranging inversion worst error %.2e cm over %d "
                               "distances (%d lost)",
                               256 - pwm_bad, worst, kInversionSamples, missing)};
    });

    report("sensor_error_shape", [&] {
        const double distance = 100.0;
        double best_t = 0, best_err = 1e300;
        for (int t = -10; t <= 50; ++t) {
            sim::UltrasonicParams up;
            up.temp_c = t;
            up.noise_enabled = false;
            sim::Ultrasonic sensor(up, 1);
            const auto got = firmware_distance(sensor.ping(distance));
            if (!got) continue;
            const double err = std::abs(*got - distance);
            if (err < best_err) {
                best_err = err;
                best_t = t;
            }
        }
        auto timeouts = [](double deg) {
            sim::UltrasonicParams up;
            up.misalignment_deg = deg;
            sim::Ultrasonic sensor(up, 7);
            int n = 0;
            for (int i = 0; i < 2000; ++i) n += sensor.ping(20.0) ? 0 : 1;
            return n / 2000.0;
        };
        const double p15 = timeouts(15.0), p25 = timeouts(25.0);
        const bool ok = best_t >= 20.0 && best_t <= 30.0 && p25 > p15;
        return Outcome{ok, fmt("min |error| %.4f cm at %.0f C; timeout rate %.3f at 15 deg, %.3f at 25 deg", best_err,
                               best_t, p15, p25)};
    });

    report("protocol_conformance", [&] {
        sim::Rng rng(sim::derive_seed(kSeed, 300));
        int rt_bad = 0, chunk_bad = 0, auth_bad = 0;
        hal::ModemLineDecoder dec(kDevice);
        for (int i = 0; i < kPropertyCases; ++i) {
            const SmsMessage msg{random_number(rng), kDevice, random_body(rng),
                                 SimTime(std::chrono::seconds(rng.uniform_int(0, 74LL * 365 * 86400)))};
            const auto ev = dec.feed(hal::format_cmt(msg));
            if (ev.size() != 1 || !std::holds_alternative<hal::event::IncomingSms>(ev[0]) ||
                std::get<hal::event::IncomingSms>(ev[0]).message != msg)
                ++rt_bad;
        }
        for (int i = 0; i < kPropertyCases; ++i) {
            std::string stream;
            for (auto p = rng.uniform_int(1, 4); p > 0; --p) {
                switch (rng.uniform_int(0, 3)) {
                case 0:
                    stream += hal::format_cmt(SmsMessage{random_number(rng), kDevice, random_body(rng),
                                                         SimTime(std::chrono::seconds(rng.uniform_int(0, 1 << 30)))});
                    break;
                case 1: stream += "\r\nOK\r\n"; break;
                case 2: stream += "\r\n+CMGS: " + std::to_string(rng.uniform_int(0, 255)) + "\r\n"; break;
                default: stream += "\r\n> "; break;
                }
            }
            hal::ModemLineDecoder whole(kDevice), chunked(kDevice);
            const auto a = whole.feed(stream);
            std::vector<hal::ModemEvent> b;
            for (std::size_t pos = 0; pos < stream.size();) {
                const auto n = static_cast<std::size_t>(rng.uniform_int(1, 12));
                auto part = chunked.feed(std::string_view(stream).substr(pos, n));
                b.insert(b.end(), part.begin(), part.end());
                pos += n;
            }
            if (a != b) ++chunk_bad;
        }
        auto state = firmware::init(default_feeder_config(), SimTime(0)).state;
        int tried = 0;
        while (tried < kPropertyCases) {
            const auto from = random_number(rng);
            if (state.config.authorized.contains(from)) continue;
            ++tried;
            const auto feeds = state.counters.feeds_remote;
            auto step = firmware::handle_sms(std::move(state), make_sms(from, kDevice, attacker_body(rng), SimTime(0)),
                                             SimTime(0));
            const firmware::Action expect = firmware::SendSms{from, std::string(firmware::kReplyUnauthorized)};
            if (step.actions.size() != 1 || !(step.actions[0] == expect) || step.state.servo_open ||
                step.state.counters.feeds_remote != feeds)
                ++auth_bad;
            state = std::move(step.state);
        }
        const bool ok = rt_bad == 0 && chunk_bad == 0 && auth_bad == 0;
        return Outcome{ok, fmt("codec round trip %d/%d, chunk invariance %d/%d, auth before PIN %d/%d",
                               kPropertyCases - rt_bad, kPropertyCases, kPropertyCases - chunk_bad, kPropertyCases,
                               kPropertyCases - auth_bad, kPropertyCases)};
    });

    report("determinism", [&] {
        struct Case {
            const char* name;
            std::function<TrialOutput(std::uint64_t)> run;
        };
        const std::vector<Case> cases = {
            {"sms", [&](std::uint64_t s) { return run_sms_trial(config, 300, s); }},
            {"dispense", [&](std::uint64_t s) { return run_dispense_trial(config, 30, s); }},
            {"endurance", [&](std::uint64_t s) { return run_endurance(config, 30, s); }},
            {"power", [&](std::uint64_t s) { return run_power_profile(config, 600.0, "feed@60,status@300", s); }},
        };
        std::string mismatched;
        std::size_t bytes = 0;
        for (const auto& c : cases) {
            const auto a = ndjson(c.run(42).trace);
            const auto b = ndjson(c.run(42).trace);
            bytes += a.size();
            if (a != b || a.empty()) mismatched += std::string(" ") + c.name;
        }
        return Outcome{mismatched.empty(), mismatched.empty()
                                               ? fmt("4 trial kinds re-run with seed 42: identical traces (%zu bytes)",
                                                     bytes)
                                               : "traces differ for" + mismatched};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
