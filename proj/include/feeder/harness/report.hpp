#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace feeder::harness {

struct LatencySummary {
    double min = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double max = 0.0;
};

/// Fixed-width bins starting at `start_ms`; values outside land in
/// `below` / `above`.
struct Histogram {
    std::int64_t start_ms = 8000;
    std::int64_t bin_ms = 1000;
    std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(5, 0);
    std::uint64_t below = 0;
    std::uint64_t above = 0;

    void add(double value_ms);
    /// Counts rise to a single peak and then fall (plateaus allowed).
    bool unimodal() const;
};

struct DispenseSummary {
    double mean_g = 0.0;
    double cv = 0.0;
};

struct TrialReport {
    std::string trial_name;
    std::uint64_t n = 0;
    std::uint64_t success_count = 0;
    // Commands whose confirmation reached the owner's phone.
    std::uint64_t confirmed_count = 0;
    LatencySummary latency_ms;
    Histogram latency_histogram;
    DispenseSummary dispense;
    std::vector<double> dispense_g;
    std::vector<std::int64_t> dispense_duration_ms;
    std::uint64_t expected_feeds = 0;
    std::uint64_t scheduled_feeds = 0;
    std::uint64_t missed_feeds = 0;
    std::uint64_t empty_feeds = 0;
    std::uint64_t alerts_sent = 0;
    std::vector<std::string> alert_recipients;
    std::uint64_t messages_lost = 0;
    std::uint64_t recharges = 0;
    double energy_mah = 0.0;  // rail side
    double energy_battery_mah = 0.0;
    double idle_endurance_h = 0.0;
    std::int64_t sim_start_ms = 0;
    std::int64_t sim_end_ms = 0;
    std::uint64_t seed = 0;
    std::string config_digest;
};

/// Nearest-rank quantile of an ascending sample, p in (0, 1].
double nearest_rank(const std::vector<double>& sorted, double p);

nlohmann::ordered_json to_json(const TrialReport& report);
std::string report_json(const TrialReport& report);
std::string summary_text(const TrialReport& report);

}  // namespace feeder::harness
