#include "sysopt/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "sysopt/error.hpp"
#include "sysopt/fs.hpp"

namespace sysopt {

double round2(double value) {
    return std::floor(value * 100.0 + 0.5) / 100.0;
}

TestOutcome run_test_gate(const std::string& command, const std::string& workspace,
                          const std::string& output_path, double timeout_s) {
    TestOutcome outcome;
    outcome.command = command;
    outcome.captured_output_path = output_path;

    int out_fd = ::open(output_path.c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0644);
    if (out_fd < 0) throw Error(ErrorCode::io_error, "cannot open " + output_path);

    auto start = std::chrono::steady_clock::now();
    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(out_fd);
        throw Error(ErrorCode::io_error, "fork failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        if (!workspace.empty() && ::chdir(workspace.c_str()) != 0) _exit(126);
        ::dup2(out_fd, STDOUT_FILENO);
        ::dup2(out_fd, STDERR_FILENO);
        ::close(out_fd);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::close(out_fd);

    int status = 0;
    const int poll_us = 20000;
    for (;;) {
        pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        if (elapsed.count() > timeout_s) {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            throw Error(ErrorCode::test_timeout,
                        "test command exceeded " + std::to_string(timeout_s) + "s");
        }
        ::usleep(poll_us);
    }

    outcome.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    outcome.passed = outcome.exit_code == 0;
    if (outcome.exit_code == 127) {
        throw Error(ErrorCode::command_not_found, "command not found: " + command);
    }
    return outcome;
}

SampleParseResult parse_samples_text(const std::string& csv_text, const std::string& path) {
    SampleParseResult result;
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::empty_benchmark_file, path + " is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timeStamp,elapsed,label,success") {
        throw Error(ErrorCode::unrecognized_header,
                    path + ": expected header 'timeStamp,elapsed,label,success', got '" + line +
                        "'");
    }

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        // Fields: timeStamp,elapsed,label,success — label must not contain commas.
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        size_t c3 = c2 == std::string::npos ? std::string::npos : line.find(',', c2 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos ||
            line.find(',', c3 + 1) != std::string::npos) {
            ++result.skipped_rows;
            continue;
        }
        BenchmarkSample s;
        try {
            size_t used = 0;
            std::string ts = line.substr(0, c1);
            std::string el = line.substr(c1 + 1, c2 - c1 - 1);
            s.timestamp_ms = std::stoll(ts, &used);
            if (used != ts.size()) throw std::invalid_argument("ts");
            s.elapsed_ms = std::stoll(el, &used);
            if (used != el.size() || s.elapsed_ms < 0) throw std::invalid_argument("elapsed");
        } catch (const std::exception&) {
            ++result.skipped_rows;
            continue;
        }
        s.label = line.substr(c2 + 1, c3 - c2 - 1);
        std::string success = line.substr(c3 + 1);
        if (success == "true") {
            s.success = true;
        } else if (success == "false") {
            s.success = false;
        } else {
            ++result.skipped_rows;
            continue;
        }
        result.samples.push_back(std::move(s));
    }

    if (result.samples.empty()) {
        throw Error(ErrorCode::empty_benchmark_file, path + " holds no valid sample rows");
    }
    return result;
}

SampleParseResult parse_samples(const std::string& path) {
    auto text = read_file(path);
    if (!text) throw Error(ErrorCode::io_error, "benchmark file not readable: " + path);
    return parse_samples_text(*text, path);
}

BenchmarkMetrics compute_metrics(const std::vector<BenchmarkSample>& samples) {
    BenchmarkMetrics m;
    m.total_requests = static_cast<int64_t>(samples.size());

    std::vector<int64_t> elapsed_ok;
    int64_t min_ts = 0, max_ts = 0, max_ts_elapsed = 0;
    bool first = true;
    double sum = 0.0;
    for (const BenchmarkSample& s : samples) {
        if (first) {
            min_ts = max_ts = s.timestamp_ms;
            max_ts_elapsed = s.elapsed_ms;
            first = false;
        } else {
            min_ts = std::min(min_ts, s.timestamp_ms);
            if (s.timestamp_ms > max_ts ||
                (s.timestamp_ms == max_ts && s.elapsed_ms > max_ts_elapsed)) {
                max_ts = s.timestamp_ms;
                max_ts_elapsed = s.elapsed_ms;
            }
        }
        if (s.success) {
            elapsed_ok.push_back(s.elapsed_ms);
            sum += static_cast<double>(s.elapsed_ms);
        }
    }
    m.success_count = static_cast<int64_t>(elapsed_ok.size());
    if (elapsed_ok.empty()) {
        throw Error(ErrorCode::no_successful_samples, "no successful samples");
    }

    double span_s = static_cast<double>(max_ts + max_ts_elapsed - min_ts) / 1000.0;
    m.throughput_rps = span_s > 0.0 ? static_cast<double>(m.success_count) / span_s : 0.0;
    m.avg_rt_ms = sum / static_cast<double>(m.success_count);

    std::sort(elapsed_ok.begin(), elapsed_ok.end());
    auto nearest_rank = [&](double p) {
        size_t n = elapsed_ok.size();
        size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
        if (rank < 1) rank = 1;
        if (rank > n) rank = n;
        return elapsed_ok[rank - 1];
    };
    m.p50_ms = nearest_rank(50.0);
    m.p90_ms = nearest_rank(90.0);
    m.p99_ms = nearest_rank(99.0);
    return m;
}

ComparisonReport compare(const BenchmarkMetrics& original, const BenchmarkMetrics& optimized) {
    ComparisonReport report;
    report.original = original;
    report.optimized = optimized;

    auto change = [](const char* name, double orig, double opt) {
        MetricChange c;
        c.metric = name;
        c.original = orig;
        c.optimized = opt;
        c.change_pct = orig != 0.0 ? (opt - orig) / orig * 100.0 : 0.0;
        return c;
    };
    report.improvement.push_back(
        change("throughput_rps", original.throughput_rps, optimized.throughput_rps));
    report.improvement.push_back(change("avg_rt_ms", original.avg_rt_ms, optimized.avg_rt_ms));
    report.improvement.push_back(change("p50_ms", static_cast<double>(original.p50_ms),
                                        static_cast<double>(optimized.p50_ms)));
    report.improvement.push_back(change("p90_ms", static_cast<double>(original.p90_ms),
                                        static_cast<double>(optimized.p90_ms)));
    report.improvement.push_back(change("p99_ms", static_cast<double>(original.p99_ms),
                                        static_cast<double>(optimized.p99_ms)));
    return report;
}

std::string render_comparison_text(const ComparisonReport& report) {
    std::ostringstream os;
    char buf[160];
    os << "metric            original     optimized    change\n";
    for (const MetricChange& c : report.improvement) {
        std::snprintf(buf, sizeof(buf), "%-16s %12.2f %12.2f   %+.2f%%\n", c.metric.c_str(),
                      c.original, c.optimized, round2(c.change_pct));
        os << buf;
    }
    return os.str();
}

}  // namespace sysopt
