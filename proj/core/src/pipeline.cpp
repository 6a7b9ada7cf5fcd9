#include "sysopt/pipeline.hpp"

#include <algorithm>
#include <fcntl.h>
#include <filesystem>
#include <set>
#include <sstream>
#include <unistd.h>

#include "sysopt/behavior.hpp"
#include "sysopt/component_graph.hpp"
#include "sysopt/error.hpp"
#include "sysopt/fs.hpp"
#include "sysopt/json_io.hpp"
#include "sysopt/parser.hpp"

namespace fs = std::filesystem;

namespace sysopt {

const char* to_string(PipelineStatus status) {
    switch (status) {
        case PipelineStatus::running: return "running";
        case PipelineStatus::terminated_no_findings: return "terminated_no_findings";
        case PipelineStatus::terminated_max_iter: return "terminated_max_iter";
        case PipelineStatus::terminated_all_rejected: return "terminated_all_rejected";
        case PipelineStatus::failed: return "failed";
    }
    return "running";
}

std::optional<PipelineStatus> pipeline_status_from_string(const std::string& s) {
    if (s == "running") return PipelineStatus::running;
    if (s == "terminated_no_findings") return PipelineStatus::terminated_no_findings;
    if (s == "terminated_max_iter") return PipelineStatus::terminated_max_iter;
    if (s == "terminated_all_rejected") return PipelineStatus::terminated_all_rejected;
    if (s == "failed") return PipelineStatus::failed;
    return std::nullopt;
}

std::string PipelineConfig::resolved_state_dir() const {
    if (!state_dir.empty() && state_dir.front() == '/') return state_dir;
    return join_path(repo_root, state_dir);
}

PatternCatalog PipelineConfig::load_patterns() const {
    if (catalog_path.empty()) return PatternCatalog::defaults();
    std::string path = catalog_path.front() == '/' ? catalog_path
                                                   : join_path(repo_root, catalog_path);
    return load_catalog_file(path);
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        size_t a = item.find_first_not_of(" \t");
        size_t b = item.find_last_not_of(" \t");
        if (a == std::string::npos) continue;
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text, const std::string& repo_root) {
    PipelineConfig config;
    config.repo_root = repo_root;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos || line[a] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::config_error,
                        "config line " + std::to_string(line_no) + " is not key = value");
        }
        auto trim = [](std::string s) {
            size_t x = s.find_first_not_of(" \t\r");
            size_t y = s.find_last_not_of(" \t\r");
            return x == std::string::npos ? std::string{} : s.substr(x, y - x + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "source_globs") {
            if (!value.empty()) config.repo.source_globs = split_list(value);
        } else if (key == "exclude_globs") {
            config.repo.exclude_globs = split_list(value);
        } else if (key == "service_marker") {
            config.repo.service_marker = value;
        } else if (key == "catalog") {
            config.catalog_path = value;
        } else if (key == "backend") {
            if (value == "deterministic") {
                config.backend.mode = BackendSelector::Mode::deterministic;
            } else if (value == "remote") {
                config.backend.mode = BackendSelector::Mode::remote;
            } else {
                throw Error(ErrorCode::config_error, "backend must be deterministic or remote");
            }
        } else if (key == "remote_url") {
            config.backend.remote_url = value;
        } else if (key == "remote_timeout_s") {
            config.backend.timeout_s = std::stod(value);
        } else if (key == "test_command") {
            config.test_command = value;
        } else if (key == "test_timeout_s") {
            config.test_timeout_s = std::stod(value);
        } else if (key == "bench_before") {
            config.bench_before = value;
        } else if (key == "bench_after") {
            config.bench_after = value;
        } else if (key == "max_iterations") {
            config.max_iterations = std::stoi(value);
        } else if (key == "state_dir") {
            config.state_dir = value;
        } else {
            throw Error(ErrorCode::config_error, "unknown config key: " + key);
        }
    }
    if (config.backend.mode == BackendSelector::Mode::remote &&
        config.backend.remote_url.empty()) {
        throw Error(ErrorCode::config_error, "backend = remote requires remote_url");
    }
    if (config.max_iterations < 1) {
        throw Error(ErrorCode::config_error, "max_iterations must be >= 1");
    }
    return config;
}

PipelineConfig load_config(const std::string& repo_root, const std::string& config_path) {
    std::string path = config_path;
    if (path.empty()) {
        std::string candidate = join_path(repo_root, "sysopt.conf");
        if (fs::exists(candidate)) path = candidate;
    } else if (path.front() != '/') {
        path = join_path(repo_root, path);
    }
    if (path.empty()) {
        PipelineConfig config;
        config.repo_root = repo_root;
        return config;
    }
    auto text = read_file(path);
    if (!text) throw Error(ErrorCode::config_error, "config file not readable: " + path);
    return parse_config_text(*text, repo_root);
}

void persist_state(const PipelineState& state, const std::string& path) {
    write_file_atomic(path, to_json_string(state));
}

PipelineState load_state(const std::string& path) {
    auto text = read_file(path);
    if (!text) throw Error(ErrorCode::corrupt_state, "state file not readable: " + path);
    PipelineState state = pipeline_state_from_json(*text);
    if (state.iteration < 0) {
        throw Error(ErrorCode::corrupt_state, "iteration must be >= 0");
    }
    std::set<std::string> applied(state.applied_patch_ids.begin(),
                                  state.applied_patch_ids.end());
    for (const std::string& id : state.suppressed_finding_ids) {
        if (applied.count(id)) {
            throw Error(ErrorCode::corrupt_state,
                        "finding " + id + " is both applied and suppressed");
        }
    }
    return state;
}

SummaryArtifacts build_summary_artifacts(const PipelineConfig& config) {
    SummaryArtifacts art;
    art.model = parse_repository(config.repo_root, config.repo);
    art.patterns = config.load_patterns();
    art.diagnostics = art.model.diagnostics;

    ServiceBoundaryRule rule =
        discover_service_roots(config.repo_root, config.repo.service_marker);
    art.graph = build_inventory(art.model, rule, &art.diagnostics);
    art.graph.endpoints = detect_endpoints(art.model, art.patterns);
    art.graph.edges = derive_dependencies(art.model, art.graph, art.patterns);
    art.behavior = build_behavior_model(art.model, art.graph.endpoints, art.patterns,
                                        &art.diagnostics);
    art.graph = classify_roles(std::move(art.graph), art.behavior.sites);

    EnvironmentSummary env = summarize_environment(config.repo_root, &art.diagnostics);
    art.summary = build_system_summary(art.graph, art.behavior, env, art.model.fingerprint);
    return art;
}

namespace {

// One pipeline instance per workspace.
class LockFile {
public:
    explicit LockFile(const std::string& path) : path_(path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) {
            throw Error(ErrorCode::config_error,
                        "another pipeline run holds " + path +
                            " (remove the file if that run is gone)");
        }
        std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] ssize_t n = ::write(fd_, pid.data(), pid.size());
    }
    ~LockFile() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(path_.c_str());
        }
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::string path_;
    int fd_ = -1;
};

class Tracer {
public:
    explicit Tracer(std::string path) : path_(std::move(path)) {
        auto existing = read_file(path_);
        if (existing) {
            next_seq_ = 1 + static_cast<int>(
                                std::count(existing->begin(), existing->end(), '\n'));
        }
    }

    TraceEvent begin(const std::string& stage) {
        TraceEvent event;
        event.sequence = next_seq_++;
        event.stage = stage;
        event.started_at = iso8601_utc_now();
        return event;
    }

    void end(TraceEvent event, const std::string& outcome,
             std::vector<std::string> artifacts = {}) {
        event.ended_at = iso8601_utc_now();
        event.outcome = outcome;
        event.artifact_paths = std::move(artifacts);
        auto existing = read_file(path_);
        std::string content = existing ? *existing : std::string{};
        content += trace_event_to_json_line(event);
        write_file_atomic(path_, content);
    }

private:
    std::string path_;
    int next_seq_ = 1;
};

std::string safe_file_component(std::string s) {
    for (char& c : s) {
        if (c == ':' || c == '/' || c == '#' || c == '(' || c == ')' || c == ',') c = '_';
    }
    return s;
}

}  // namespace

PipelineState run_pipeline(const PipelineConfig& config) {
    std::string state_dir = config.resolved_state_dir();
    fs::create_directories(state_dir);
    std::string state_path = join_path(state_dir, "state.json");

    PipelineState state;
    if (fs::exists(state_path)) {
        try {
            state = load_state(state_path);
            if (state.status != PipelineStatus::running) {
                state.iteration = 0;  // fresh run; suppressions and history carry over
            }
            state.status = PipelineStatus::running;
            state.failure_stage.clear();
        } catch (const Error&) {
            state = PipelineState{};
        }
    }

    LockFile lock(join_path(state_dir, "lock"));
    Tracer tracer(join_path(state_dir, "trace.log"));

    PatternCatalog patterns;
    RuleCatalog rules;
    try {
        patterns = config.load_patterns();
        rules = RuleCatalog::defaults(patterns);
    } catch (const Error& e) {
        state.status = PipelineStatus::failed;
        state.failure_stage = "summarize";
        persist_state(state, state_path);
        TraceEvent event = tracer.begin("summarize");
        tracer.end(event, std::string("failed: ") + e.what());
        return state;
    }

    int start_iteration = state.iteration;
    std::set<std::string> suppressed(state.suppressed_finding_ids.begin(),
                                     state.suppressed_finding_ids.end());

    for (int iter = start_iteration + 1; iter <= config.max_iterations; ++iter) {
        // ---- summarize -----------------------------------------------------
        TraceEvent ev = tracer.begin("summarize");
        SummaryArtifacts art;
        std::string summary_path = join_path(state_dir, "system_summary.json");
        bool reused = false;
        try {
            art.model = parse_repository(config.repo_root, config.repo);
            art.patterns = patterns;
            art.diagnostics = art.model.diagnostics;
            if (art.model.fingerprint == state.repo_fingerprint && fs::exists(summary_path)) {
                auto text = read_file(summary_path);
                art.summary = system_summary_from_json(text ? *text : "");
                art.graph = art.summary.component.graph;
                art.behavior = art.summary.behavior.behavior;
                reused = true;
            } else {
                ServiceBoundaryRule rule =
                    discover_service_roots(config.repo_root, config.repo.service_marker);
                art.graph = build_inventory(art.model, rule, &art.diagnostics);
                art.graph.endpoints = detect_endpoints(art.model, art.patterns);
                art.graph.edges = derive_dependencies(art.model, art.graph, art.patterns);
                art.behavior = build_behavior_model(art.model, art.graph.endpoints,
                                                    art.patterns, &art.diagnostics);
                art.graph = classify_roles(std::move(art.graph), art.behavior.sites);
                EnvironmentSummary env =
                    summarize_environment(config.repo_root, &art.diagnostics);
                art.summary = build_system_summary(art.graph, art.behavior, env,
                                                   art.model.fingerprint);
                write_file_atomic(summary_path, to_json_string(art.summary));
            }
        } catch (const Error& e) {
            state.status = PipelineStatus::failed;
            state.failure_stage = "summarize";
            persist_state(state, state_path);
            tracer.end(ev, std::string("failed: ") + e.what());
            return state;
        }
        state.iteration = iter;
        state.repo_fingerprint = art.model.fingerprint;
        state.summary_path = summary_path;
        persist_state(state, state_path);
        tracer.end(ev, reused ? "reused" : "rebuilt", {summary_path});

        // ---- analyze --------------------------------------------------------
        ev = tracer.begin("analyze");
        AnalysisReport report;
        std::string report_path = join_path(state_dir, "analysis_report.json");
        try {
            std::vector<Finding> findings =
                rank_findings(detect_findings(art.summary, rules, patterns, art.model));
            report = build_report(std::move(findings), art.summary, art.diagnostics);
            write_file_atomic(report_path, to_json_string(report));
        } catch (const Error& e) {
            state.status = PipelineStatus::failed;
            state.failure_stage = "analyze";
            persist_state(state, state_path);
            tracer.end(ev, std::string("failed: ") + e.what());
            return state;
        }
        state.report_path = report_path;
        persist_state(state, state_path);
        tracer.end(ev, std::to_string(report.findings.size()) + " findings", {report_path});

        if (report.findings.empty()) {
            state.status = PipelineStatus::terminated_no_findings;
            persist_state(state, state_path);
            return state;
        }

        // ---- optimize -------------------------------------------------------
        ev = tracer.begin("optimize");
        std::vector<Finding> remaining;
        for (const Finding& f : report.findings) {
            if (!suppressed.count(f.id)) remaining.push_back(f);
        }
        if (remaining.empty()) {
            state.status = PipelineStatus::terminated_all_rejected;
            persist_state(state, state_path);
            tracer.end(ev, "all findings suppressed");
            return state;
        }

        GeneratedPatches generated;
        ApplyOutcome outcome;
        std::map<std::string, std::string> snapshot;  // pre-patch bytes per file
        std::string patchset_path =
            join_path(state_dir, "patchset_iter" + std::to_string(iter) + ".json");
        try {
            if (config.backend.mode == BackendSelector::Mode::deterministic) {
                generated = generate_patchset(remaining, art.model, iter, config.repo_root);
            } else {
                generated.set = request_remote_patches(report, art.summary, config.backend,
                                                       iter, &art.diagnostics);
            }
            if (generated.set.patches.empty()) {
                write_file_atomic(patchset_path, to_json_string(generated.set));
                state.status = PipelineStatus::terminated_all_rejected;
                persist_state(state, state_path);
                tracer.end(ev, "no applicable patches", {patchset_path});
                return state;
            }
            for (const Patch& p : generated.set.patches) {
                auto it = art.model.sources.find(p.target_path);
                if (it != art.model.sources.end()) snapshot.emplace(p.target_path, it->second);
            }
            outcome = apply_patchset(generated.set, config.repo_root, art.model, patterns);

            PatchSet final_set;
            final_set.base_fingerprint = generated.set.base_fingerprint;
            final_set.iteration = iter;
            final_set.patches = outcome.applied;
            final_set.patches.insert(final_set.patches.end(), outcome.rejected.begin(),
                                     outcome.rejected.end());
            write_file_atomic(patchset_path, to_json_string(final_set));
            std::string patch_dir = join_path(state_dir, "patches");
            for (const Patch& p : final_set.patches) {
                write_file_atomic(join_path(patch_dir, "iter" + std::to_string(iter) + "_" +
                                                           safe_file_component(p.finding_id) +
                                                           ".diff"),
                                  p.diff);
            }
        } catch (const Error& e) {
            state.status = PipelineStatus::failed;
            state.failure_stage = "optimize";
            persist_state(state, state_path);
            tracer.end(ev, std::string("failed: ") + e.what());
            return state;
        }

        std::vector<std::string> iteration_applied;
        for (const Patch& p : outcome.applied) {
            iteration_applied.push_back(p.finding_id);
            state.applied_patch_ids.push_back(p.finding_id);
        }
        for (const Patch& p : outcome.rejected) {
            state.rejected_finding_ids.push_back(p.finding_id);
        }
        persist_state(state, state_path);
        tracer.end(ev,
                   std::to_string(outcome.applied.size()) + " applied, " +
                       std::to_string(outcome.rejected.size()) + " rejected",
                   {patchset_path});

        if (outcome.applied.empty()) {
            state.status = PipelineStatus::terminated_all_rejected;
            persist_state(state, state_path);
            return state;
        }
        art.model = outcome.model;

        // ---- evaluate -------------------------------------------------------
        ev = tracer.begin("evaluate");
        std::vector<std::string> artifacts;
        std::string outcome_text = "no gate configured";
        try {
            bool gate_passed = true;
            if (!config.test_command.empty()) {
                std::string log_path = join_path(
                    state_dir, "test_output_iter" + std::to_string(iter) + ".log");
                artifacts.push_back(log_path);
                TestOutcome test;
                try {
                    test = run_test_gate(config.test_command, config.repo_root, log_path,
                                         config.test_timeout_s);
                    gate_passed = test.passed;
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::test_timeout) {
                        gate_passed = false;  // timeout counts as failure
                    } else {
                        throw;
                    }
                }
                if (!gate_passed) {
                    for (const auto& [path, bytes] : snapshot) {
                        write_file_atomic(join_path(config.repo_root, path), bytes);
                    }
                    for (const std::string& id : iteration_applied) {
                        suppressed.insert(id);
                        state.suppressed_finding_ids.push_back(id);
                        state.applied_patch_ids.erase(
                            std::remove(state.applied_patch_ids.begin(),
                                        state.applied_patch_ids.end(), id),
                            state.applied_patch_ids.end());
                    }
                    outcome_text = "tests failed; patches reverted and findings suppressed";
                } else {
                    outcome_text = "tests passed";
                }
            }
            if (gate_passed && !config.bench_before.empty() && !config.bench_after.empty()) {
                BenchmarkMetrics before = compute_metrics(parse_samples(config.bench_before).samples);
                BenchmarkMetrics after = compute_metrics(parse_samples(config.bench_after).samples);
                ComparisonReport cmp = compare(before, after);
                std::string cmp_path = join_path(
                    state_dir, "comparison_report_iter" + std::to_string(iter) + ".json");
                write_file_atomic(cmp_path, to_json_string(cmp));
                state.metrics_history.push_back(cmp_path);
                artifacts.push_back(cmp_path);
                if (outcome_text == "no gate configured") outcome_text = "metrics compared";
                else outcome_text += "; metrics compared";
            }
        } catch (const Error& e) {
            state.status = PipelineStatus::failed;
            state.failure_stage = "evaluate";
            persist_state(state, state_path);
            tracer.end(ev, std::string("failed: ") + e.what());
            return state;
        }
        persist_state(state, state_path);
        tracer.end(ev, outcome_text, artifacts);
    }

    state.status = PipelineStatus::terminated_max_iter;
    persist_state(state, state_path);
    return state;
}

}  // namespace sysopt
