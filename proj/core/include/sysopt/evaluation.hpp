#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sysopt {

struct TestOutcome {
    std::string command;
    int exit_code = -1;
    bool passed = false;  // exit_code == 0
    double duration_s = 0.0;
    std::string captured_output_path;
};

struct BenchmarkSample {
    int64_t timestamp_ms = 0;  // epoch milliseconds
    int64_t elapsed_ms = 0;
    std::string label;
    bool success = false;
};

struct BenchmarkMetrics {
    int64_t total_requests = 0;
    int64_t success_count = 0;
    double throughput_rps = 0.0;
    double avg_rt_ms = 0.0;
    int64_t p50_ms = 0;
    int64_t p90_ms = 0;
    int64_t p99_ms = 0;
};

struct MetricChange {
    std::string metric;
    double original = 0.0;
    double optimized = 0.0;
    // Signed percentage change relative to the original value; latency
    // reductions therefore appear negative.
    double change_pct = 0.0;
};

struct ComparisonReport {
    BenchmarkMetrics original;
    BenchmarkMetrics optimized;
    std::vector<MetricChange> improvement;  // throughput, avg_rt, p50, p90, p99
};

struct SampleParseResult {
    std::vector<BenchmarkSample> samples;
    int64_t skipped_rows = 0;
};

// Runs `command` through the shell in `workspace`, writing combined output
// to `output_path`. Throws Error(TestTimeout) after `timeout_s` and
// Error(CommandNotFound) when the shell reports exit 127.
TestOutcome run_test_gate(const std::string& command, const std::string& workspace,
                          const std::string& output_path, double timeout_s = 600.0);

// CSV schema: header literal "timeStamp,elapsed,label,success", success is
// the literal true/false. Malformed rows are counted and skipped.
// Throws Error(UnrecognizedHeader) / Error(EmptyBenchmarkFile).
SampleParseResult parse_samples(const std::string& path);
SampleParseResult parse_samples_text(const std::string& csv_text, const std::string& path);

// Nearest-rank percentiles over successful samples; wall-clock span runs
// from the earliest timestamp to the latest timestamp plus its elapsed.
// Throws Error(NoSuccessfulSamples).
BenchmarkMetrics compute_metrics(const std::vector<BenchmarkSample>& samples);

ComparisonReport compare(const BenchmarkMetrics& original, const BenchmarkMetrics& optimized);

// Half-up rounding to two decimals, used for display.
double round2(double value);

std::string render_comparison_text(const ComparisonReport& report);

}  // namespace sysopt
