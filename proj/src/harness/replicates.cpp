#include "feeder/harness/replicates.hpp"

#include <algorithm>
#include <exception>

namespace feeder::harness {

TrialOutput run_trial(const SimConfig& config, const TrialRequest& request, std::uint64_t seed) {
    switch (request.kind) {
    case TrialKind::Sms: return run_sms_trial(config, request.n, seed);
    case TrialKind::Dispense: return run_dispense_trial(config, request.n, seed);
    case TrialKind::Endurance: return run_endurance(config, request.days, seed);
    case TrialKind::Power: return run_power_profile(config, request.duration_s, request.workload, seed);
    }
    throw InvalidConfig("unknown trial kind");
}

std::vector<TrialReport> run_replicates_serial(const SimConfig& config, const TrialRequest& request,
                                               std::span<const std::uint64_t> seeds) {
    std::vector<TrialReport> out;
    out.reserve(seeds.size());
    for (auto seed : seeds) out.push_back(run_trial(config, request, seed).report);
    return out;
}

std::vector<TrialReport> run_replicates(const SimConfig& config, const TrialRequest& request,
                                        std::span<const std::uint64_t> seeds) {
    const auto count = static_cast<long>(seeds.size());
    std::vector<TrialReport> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());

#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = run_trial(config, request, seeds[static_cast<std::size_t>(i)]).report;
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }

    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

ReplicateSummary summarize(const std::vector<TrialReport>& reports) {
    ReplicateSummary s;
    s.replicates = reports.size();
    if (reports.empty()) return s;
    s.success_rate_min = 1.0;
    double dispense_sum = 0.0;
    for (const auto& r : reports) {
        const double rate = r.n ? static_cast<double>(r.success_count) / static_cast<double>(r.n) : 0.0;
        s.success_rate_mean += rate;
        s.success_rate_min = std::min(s.success_rate_min, rate);
        s.success_rate_max = std::max(s.success_rate_max, rate);
        s.latency_max_ms = std::max(s.latency_max_ms, r.latency_ms.max);
        dispense_sum += r.dispense.mean_g;
        s.missed_feeds += r.missed_feeds;
    }
    s.success_rate_mean /= static_cast<double>(reports.size());
    s.dispense_mean_g = dispense_sum / static_cast<double>(reports.size());
    return s;
}

}  // namespace feeder::harness
