#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "sysopt/evaluation.hpp"

namespace {

std::string synthetic_csv(int rows) {
    std::string csv = "timeStamp,elapsed,label,success\n";
    csv.reserve(static_cast<size_t>(rows) * 36u);
    int64_t ts = 1700000000000;
    for (int i = 0; i < rows; ++i) {
        csv += std::to_string(ts + i) + "," + std::to_string(1 + i % 50) + ",load,true\n";
    }
    return csv;
}

void parse_samples_bench(benchmark::State& state) {
    std::string csv = synthetic_csv(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto result = sysopt::parse_samples_text(csv, "bench.csv");
        benchmark::DoNotOptimize(result);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}

void compute_metrics_bench(benchmark::State& state) {
    auto parsed = sysopt::parse_samples_text(synthetic_csv(static_cast<int>(state.range(0))),
                                             "bench.csv");
    for (auto _ : state) {
        auto metrics = sysopt::compute_metrics(parsed.samples);
        benchmark::DoNotOptimize(metrics);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}

}  // namespace

// 800k rows matches the load-test scale the parser has to sustain.
BENCHMARK(parse_samples_bench)->Arg(10000)->Arg(800000)->Unit(benchmark::kMillisecond);
BENCHMARK(compute_metrics_bench)->Arg(10000)->Arg(800000)->Unit(benchmark::kMillisecond);
