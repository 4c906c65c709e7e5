#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feeder/harness/trials.hpp"

namespace feeder::harness {

struct TrialRequest {
    TrialKind kind = TrialKind::Sms;
    std::uint64_t n = 100;
    std::uint64_t days = 30;
    double duration_s = 600.0;
    std::string workload = "idle";
};

TrialOutput run_trial(const SimConfig& config, const TrialRequest& request, std::uint64_t seed);

/// One independent world per seed. Results come back in seed order.
std::vector<TrialReport> run_replicates(const SimConfig& config, const TrialRequest& request,
                                        std::span<const std::uint64_t> seeds);

/// Same contract, one seed after another.
std::vector<TrialReport> run_replicates_serial(const SimConfig& config, const TrialRequest& request,
                                               std::span<const std::uint64_t> seeds);

struct ReplicateSummary {
    std::size_t replicates = 0;
    double success_rate_mean = 0.0;
    double success_rate_min = 0.0;
    double success_rate_max = 0.0;
    double latency_max_ms = 0.0;
    double dispense_mean_g = 0.0;
    std::uint64_t missed_feeds = 0;
};

ReplicateSummary summarize(const std::vector<TrialReport>& reports);

}  // namespace feeder::harness
