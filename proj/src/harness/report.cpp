#include "feeder/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace feeder::harness {

void Histogram::add(double value_ms) {
    if (value_ms < static_cast<double>(start_ms)) {
        ++below;
        return;
    }
    const auto bin = static_cast<std::size_t>((value_ms - static_cast<double>(start_ms)) / static_cast<double>(bin_ms));
    if (bin >= counts.size())
        ++above;
    else
        ++counts[bin];
}

bool Histogram::unimodal() const {
    std::size_t i = 0;
    while (i + 1 < counts.size() && counts[i + 1] >= counts[i]) ++i;
    while (i + 1 < counts.size() && counts[i + 1] <= counts[i]) ++i;
    return i + 1 >= counts.size();
}

double nearest_rank(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    if (p <= 0.0 || p > 1.0) throw std::invalid_argument("quantile outside (0, 1]");
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
    if (rank < 1) rank = 1;
    return sorted[rank - 1];
}

nlohmann::ordered_json to_json(const TrialReport& r) {
    nlohmann::ordered_json j;
    j["trial_name"] = r.trial_name;
    j["n"] = r.n;
    j["success_count"] = r.success_count;
    j["confirmed_count"] = r.confirmed_count;
    j["latency_ms"] = {{"min", r.latency_ms.min}, {"p50", r.latency_ms.p50}, {"p90", r.latency_ms.p90},
                       {"max", r.latency_ms.max}};
    j["latency_histogram"] = {{"start_ms", r.latency_histogram.start_ms},
                              {"bin_ms", r.latency_histogram.bin_ms},
                              {"counts", r.latency_histogram.counts},
                              {"below", r.latency_histogram.below},
                              {"above", r.latency_histogram.above}};
    j["dispense"] = {{"mean_g", r.dispense.mean_g}, {"cv", r.dispense.cv}};
    j["dispense_g"] = r.dispense_g;
    j["dispense_duration_ms"] = r.dispense_duration_ms;
    j["expected_feeds"] = r.expected_feeds;
    j["scheduled_feeds"] = r.scheduled_feeds;
    j["missed_feeds"] = r.missed_feeds;
    j["empty_feeds"] = r.empty_feeds;
    j["alerts_sent"] = r.alerts_sent;
    j["alert_recipients"] = r.alert_recipients;
    j["messages_lost"] = r.messages_lost;
    j["recharges"] = r.recharges;
    j["energy_mah"] = r.energy_mah;
    j["energy_battery_mah"] = r.energy_battery_mah;
    j["idle_endurance_h"] = r.idle_endurance_h;
    j["sim_start_ms"] = r.sim_start_ms;
    j["sim_end_ms"] = r.sim_end_ms;
    j["seed"] = r.seed;
    j["config_digest"] = r.config_digest;
    return j;
}

std::string report_json(const TrialReport& report) { return to_json(report).dump(2) + "\n"; }

std::string summary_text(const TrialReport& r) {
    char buf[256];
    std::string out;
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
        out += '\n';
    };
    line("trial            %s", r.trial_name.c_str());
    line("seed             %llu", static_cast<unsigned long long>(r.seed));
    line("config digest    %s", r.config_digest.c_str());
    line("simulated        %.3f h", static_cast<double>(r.sim_end_ms - r.sim_start_ms) / 3.6e6);
    const double rate = r.n ? 100.0 * static_cast<double>(r.success_count) / static_cast<double>(r.n) : 0.0;
    line("success          %llu / %llu (%.2f%%)", static_cast<unsigned long long>(r.success_count),
         static_cast<unsigned long long>(r.n), rate);
    line("confirmed        %llu", static_cast<unsigned long long>(r.confirmed_count));
    if (r.confirmed_count > 0)
        line("latency ms       min %.0f  p50 %.0f  p90 %.0f  max %.0f", r.latency_ms.min, r.latency_ms.p50,
             r.latency_ms.p90, r.latency_ms.max);
    if (!r.dispense_g.empty())
        line("dispense         %zu cycles, mean %.2f g, cv %.4f", r.dispense_g.size(), r.dispense.mean_g,
             r.dispense.cv);
    line("feeds            %llu scheduled / %llu expected, %llu missed, %llu empty",
         static_cast<unsigned long long>(r.scheduled_feeds), static_cast<unsigned long long>(r.expected_feeds),
         static_cast<unsigned long long>(r.missed_feeds), static_cast<unsigned long long>(r.empty_feeds));
    line("alerts           %llu (%zu recipients)", static_cast<unsigned long long>(r.alerts_sent),
         r.alert_recipients.size());
    line("messages lost    %llu", static_cast<unsigned long long>(r.messages_lost));
    line("energy           %.3f mAh rail, %.3f mAh battery, %llu recharges", r.energy_mah, r.energy_battery_mah,
         static_cast<unsigned long long>(r.recharges));
    line("idle endurance   %.2f h per charge", r.idle_endurance_h);
    return out;
}

}  // namespace feeder::harness
