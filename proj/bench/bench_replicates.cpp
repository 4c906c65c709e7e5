#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "feeder/harness/replicates.hpp"

using namespace feeder::harness;

namespace {

std::vector<std::uint64_t> seeds(std::int64_t n) {
    std::vector<std::uint64_t> s(static_cast<std::size_t>(n));
    std::iota(s.begin(), s.end(), 1);
    return s;
}

void BM_SmsReplicatesSerial(benchmark::State& state) {
    const auto config = default_sim_config();
    const auto s = seeds(state.range(0));
    TrialRequest req{TrialKind::Sms, 500};
    for (auto _ : state) benchmark::DoNotOptimize(run_replicates_serial(config, req, s));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SmsReplicatesParallel(benchmark::State& state) {
    const auto config = default_sim_config();
    const auto s = seeds(state.range(0));
    TrialRequest req{TrialKind::Sms, 500};
    for (auto _ : state) benchmark::DoNotOptimize(run_replicates(config, req, s));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnduranceReplicatesSerial(benchmark::State& state) {
    const auto config = default_sim_config();
    const auto s = seeds(state.range(0));
    TrialRequest req{TrialKind::Endurance};
    for (auto _ : state) benchmark::DoNotOptimize(run_replicates_serial(config, req, s));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnduranceReplicatesParallel(benchmark::State& state) {
    const auto config = default_sim_config();
    const auto s = seeds(state.range(0));
    TrialRequest req{TrialKind::Endurance};
    for (auto _ : state) benchmark::DoNotOptimize(run_replicates(config, req, s));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SmsReplicatesSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SmsReplicatesParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnduranceReplicatesSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnduranceReplicatesParallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
