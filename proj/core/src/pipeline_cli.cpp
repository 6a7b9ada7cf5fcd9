#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "sysopt/analysis.hpp"
#include "sysopt/error.hpp"
#include "sysopt/fs.hpp"
#include "sysopt/json_io.hpp"
#include "sysopt/pipeline.hpp"

namespace sysopt {

namespace {

struct GlobalOpts {
    std::string repo = ".";
    std::string state_dir;
    std::string config_path;
    std::string catalog_path;
    std::string format = "text";
    std::vector<std::string> source_globs;
    std::vector<std::string> exclude_globs;
};

PipelineConfig make_config(const GlobalOpts& opts) {
    PipelineConfig config = load_config(opts.repo, opts.config_path);
    if (!opts.state_dir.empty()) config.state_dir = opts.state_dir;
    if (!opts.catalog_path.empty()) config.catalog_path = opts.catalog_path;
    if (!opts.source_globs.empty()) config.repo.source_globs = opts.source_globs;
    if (!opts.exclude_globs.empty()) config.repo.exclude_globs = opts.exclude_globs;
    return config;
}

void emit_diagnostics(const std::vector<Diagnostic>& diagnostics) {
    for (const Diagnostic& d : diagnostics) std::cerr << d.to_line() << "\n";
}

int cmd_summarize(const GlobalOpts& opts) {
    PipelineConfig config = make_config(opts);
    SummaryArtifacts art = build_summary_artifacts(config);
    emit_diagnostics(art.diagnostics);
    std::string dir = config.resolved_state_dir();
    std::filesystem::create_directories(dir);
    std::string path = join_path(dir, "system_summary.json");
    std::string doc = to_json_string(art.summary);
    write_file_atomic(path, doc);
    if (opts.format == "json") {
        std::cout << doc;
    } else {
        std::cout << "summary written to " << path << "\n"
                  << "services " << art.graph.service_count << ", classes "
                  << art.graph.class_count << ", methods " << art.graph.method_count
                  << ", endpoints " << art.graph.endpoints.size() << ", sites "
                  << art.behavior.sites.size() << "\n";
    }
    return 0;
}

int cmd_analyze(const GlobalOpts& opts) {
    PipelineConfig config = make_config(opts);
    SummaryArtifacts art = build_summary_artifacts(config);
    emit_diagnostics(art.diagnostics);
    RuleCatalog rules = RuleCatalog::defaults(art.patterns);
    std::vector<Finding> findings =
        rank_findings(detect_findings(art.summary, rules, art.patterns, art.model));
    AnalysisReport report = build_report(std::move(findings), art.summary, art.diagnostics);

    std::string dir = config.resolved_state_dir();
    std::filesystem::create_directories(dir);
    std::string doc = to_json_string(report);
    write_file_atomic(join_path(dir, "analysis_report.json"), doc);
    if (opts.format == "json") std::cout << doc;
    else std::cout << render_report_text(report);
    return 0;
}

int cmd_optimize(const GlobalOpts& opts, const std::string& backend,
                 const std::string& remote_url, double timeout_s) {
    PipelineConfig config = make_config(opts);
    if (!backend.empty()) {
        config.backend.mode = backend == "remote" ? BackendSelector::Mode::remote
                                                  : BackendSelector::Mode::deterministic;
    }
    if (!remote_url.empty()) config.backend.remote_url = remote_url;
    if (timeout_s > 0) config.backend.timeout_s = timeout_s;
    if (config.backend.mode == BackendSelector::Mode::remote &&
        config.backend.remote_url.empty()) {
        throw Error(ErrorCode::config_error, "remote backend requires --remote-url");
    }

    SummaryArtifacts art = build_summary_artifacts(config);
    emit_diagnostics(art.diagnostics);
    RuleCatalog rules = RuleCatalog::defaults(art.patterns);
    std::vector<Finding> findings =
        rank_findings(detect_findings(art.summary, rules, art.patterns, art.model));
    AnalysisReport report = build_report(findings, art.summary, art.diagnostics);

    GeneratedPatches generated;
    if (config.backend.mode == BackendSelector::Mode::deterministic) {
        generated = generate_patchset(findings, art.model, 1, config.repo_root);
    } else {
        generated.set =
            request_remote_patches(report, art.summary, config.backend, 1, &art.diagnostics);
    }
    ApplyOutcome outcome =
        apply_patchset(generated.set, config.repo_root, art.model, art.patterns);

    PatchSet final_set;
    final_set.base_fingerprint = generated.set.base_fingerprint;
    final_set.iteration = 1;
    final_set.patches = outcome.applied;
    final_set.patches.insert(final_set.patches.end(), outcome.rejected.begin(),
                             outcome.rejected.end());
    std::string dir = config.resolved_state_dir();
    std::filesystem::create_directories(dir);
    std::string doc = to_json_string(final_set);
    write_file_atomic(join_path(dir, "patchset.json"), doc);
    for (const Patch& p : final_set.patches) {
        std::string name = p.finding_id;
        for (char& c : name) {
            if (c == ':' || c == '/' || c == '#' || c == '(' || c == ')' || c == ',') c = '_';
        }
        write_file_atomic(join_path(join_path(dir, "patches"), name + ".diff"), p.diff);
    }

    if (opts.format == "json") {
        std::cout << doc;
    } else {
        std::cout << "applied " << outcome.applied.size() << ", rejected "
                  << outcome.rejected.size() << ", skipped " << generated.skipped.size() << "\n";
        for (const Patch& p : outcome.applied) {
            std::cout << "  applied " << p.finding_id << " -> " << p.target_path << "\n";
        }
        for (const Patch& p : outcome.rejected) {
            std::cout << "  " << to_string(p.status) << " " << p.finding_id << ": "
                      << p.status_reason << "\n";
        }
        for (const SkippedFinding& s : generated.skipped) {
            std::cout << "  skipped " << s.finding_id << ": " << s.reason << "\n";
        }
    }
    return 0;
}

int cmd_evaluate(const GlobalOpts& opts, const std::string& before, const std::string& after,
                 const std::string& test_command, double timeout_s) {
    PipelineConfig config = make_config(opts);
    std::string dir = config.resolved_state_dir();
    std::filesystem::create_directories(dir);
    int exit_code = 0;

    if (!test_command.empty()) {
        std::string log_path = join_path(dir, "test_output.log");
        TestOutcome outcome;
        bool passed = false;
        try {
            outcome = run_test_gate(test_command, config.repo_root, log_path,
                                    timeout_s > 0 ? timeout_s : config.test_timeout_s);
            passed = outcome.passed;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::test_timeout) throw;
            std::cerr << e.what() << "\n";
        }
        std::cout << "test gate " << (passed ? "passed" : "failed") << " (output: " << log_path
                  << ")\n";
        if (!passed) exit_code = 1;
    }

    if (!before.empty() || !after.empty()) {
        if (before.empty() || after.empty()) {
            throw Error(ErrorCode::config_error, "--before and --after must be given together");
        }
        BenchmarkMetrics orig = compute_metrics(parse_samples(before).samples);
        BenchmarkMetrics opt = compute_metrics(parse_samples(after).samples);
        ComparisonReport report = compare(orig, opt);
        std::string doc = to_json_string(report);
        write_file_atomic(join_path(dir, "comparison_report.json"), doc);
        if (opts.format == "json") std::cout << doc;
        else std::cout << render_comparison_text(report);
    }
    return exit_code;
}

int cmd_run(const GlobalOpts& opts, int max_iterations, const std::string& backend,
            const std::string& remote_url, const std::string& test_command) {
    PipelineConfig config = make_config(opts);
    if (max_iterations > 0) config.max_iterations = max_iterations;
    if (!backend.empty()) {
        config.backend.mode = backend == "remote" ? BackendSelector::Mode::remote
                                                  : BackendSelector::Mode::deterministic;
    }
    if (!remote_url.empty()) config.backend.remote_url = remote_url;
    if (!test_command.empty()) config.test_command = test_command;

    PipelineState state = run_pipeline(config);
    if (opts.format == "json") {
        std::cout << to_json_string(state);
    } else {
        std::cout << "status: " << to_string(state.status) << "\n"
                  << "iterations: " << state.iteration << "\n"
                  << "applied: " << state.applied_patch_ids.size() << ", suppressed: "
                  << state.suppressed_finding_ids.size() << "\n";
    }
    return state.status == PipelineStatus::failed ? 1 : 0;
}

int cmd_state_show(const GlobalOpts& opts) {
    PipelineConfig config = make_config(opts);
    std::string path = join_path(config.resolved_state_dir(), "state.json");
    auto text = read_file(path);
    if (!text) {
        std::cerr << "no state file at " << path << "\n";
        return 1;
    }
    PipelineState state = load_state(path);  // validates before echoing
    if (opts.format == "json") std::cout << to_json_string(state);
    else {
        std::cout << "status: " << to_string(state.status) << "\niteration: " << state.iteration
                  << "\nfingerprint: " << state.repo_fingerprint << "\napplied: "
                  << state.applied_patch_ids.size() << "\nsuppressed: "
                  << state.suppressed_finding_ids.size() << "\n";
    }
    return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"sysopt: static microservice performance summarizer and optimizer"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts opts;
    app.add_option("--repo", opts.repo, "Repository root")->capture_default_str();
    app.add_option("--state-dir", opts.state_dir, "State directory (default .sysopt)");
    app.add_option("--config", opts.config_path, "Config file (default <repo>/sysopt.conf)");
    app.add_option("--catalog", opts.catalog_path, "Pattern catalog JSON");
    app.add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    app.add_option("--source-glob", opts.source_globs, "Source glob override (repeatable)");
    app.add_option("--exclude-glob", opts.exclude_globs, "Exclusion glob override (repeatable)");

    app.add_subcommand("summarize", "Build and persist the system summary");
    app.add_subcommand("analyze", "Detect and rank bottleneck findings");

    auto* optimize = app.add_subcommand("optimize", "Generate and apply non-breaking patches");
    std::string backend, remote_url;
    double remote_timeout = 0;
    optimize->add_option("--backend", backend, "deterministic|remote")
        ->check(CLI::IsMember({"deterministic", "remote"}));
    optimize->add_option("--remote-url", remote_url, "Remote optimizer endpoint");
    optimize->add_option("--timeout", remote_timeout, "Remote timeout seconds");

    auto* evaluate = app.add_subcommand("evaluate", "Compare benchmark samples / run test gate");
    std::string before, after, test_command;
    double test_timeout = 0;
    evaluate->add_option("--before", before, "Baseline benchmark CSV");
    evaluate->add_option("--after", after, "Optimized benchmark CSV");
    evaluate->add_option("--test-command", test_command, "Correctness gate command");
    evaluate->add_option("--test-timeout", test_timeout, "Gate timeout seconds");

    auto* run = app.add_subcommand("run", "Run the full summarize/analyze/optimize/evaluate loop");
    int max_iterations = 0;
    std::string run_backend, run_remote_url, run_test_command;
    run->add_option("--max-iterations", max_iterations, "Iteration cap");
    run->add_option("--backend", run_backend, "deterministic|remote")
        ->check(CLI::IsMember({"deterministic", "remote"}));
    run->add_option("--remote-url", run_remote_url, "Remote optimizer endpoint");
    run->add_option("--test-command", run_test_command, "Correctness gate command");

    auto* state_cmd = app.add_subcommand("state", "Inspect persistent pipeline state");
    auto* state_show = state_cmd->add_subcommand("show", "Print the current state file");
    state_cmd->require_subcommand(1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand("summarize")) return cmd_summarize(opts);
        if (app.got_subcommand("analyze")) return cmd_analyze(opts);
        if (app.got_subcommand("optimize")) {
            return cmd_optimize(opts, backend, remote_url, remote_timeout);
        }
        if (app.got_subcommand("evaluate")) {
            return cmd_evaluate(opts, before, after, test_command, test_timeout);
        }
        if (app.got_subcommand("run")) {
            return cmd_run(opts, max_iterations, run_backend, run_remote_url, run_test_command);
        }
        if (state_cmd->parsed() && state_show->parsed()) return cmd_state_show(opts);
        std::cerr << app.help();
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sysopt
