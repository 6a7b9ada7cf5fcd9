#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sysopt/analysis.hpp"
#include "sysopt/catalog.hpp"
#include "sysopt/code_model.hpp"
#include "sysopt/evaluation.hpp"
#include "sysopt/patching.hpp"
#include "sysopt/summary.hpp"

namespace sysopt {

inline constexpr const char* kSchemaVersion = "1";

struct PipelineConfig {
    std::string repo_root = ".";
    std::string state_dir = ".sysopt";  // resolved against repo_root when relative
    RepoConfig repo;
    std::string catalog_path;  // optional JSON catalog
    BackendSelector backend;
    std::string test_command;  // optional correctness gate
    double test_timeout_s = 600.0;
    std::string bench_before;  // optional benchmark CSV pair
    std::string bench_after;
    int max_iterations = 5;

    std::string resolved_state_dir() const;
    PatternCatalog load_patterns() const;
};

// key = value lines; '#' starts a comment. Unknown keys are rejected.
PipelineConfig parse_config_text(const std::string& text, const std::string& repo_root);
PipelineConfig load_config(const std::string& repo_root, const std::string& config_path = "");

enum class PipelineStatus {
    running,
    terminated_no_findings,
    terminated_max_iter,
    terminated_all_rejected,
    failed,
};

const char* to_string(PipelineStatus status);
std::optional<PipelineStatus> pipeline_status_from_string(const std::string& s);

struct TraceEvent {
    int sequence = 0;
    std::string stage;  // summarize | analyze | optimize | evaluate
    std::string started_at;
    std::string ended_at;
    std::string outcome;
    std::vector<std::string> artifact_paths;
};

struct PipelineState {
    std::string schema_version = kSchemaVersion;
    int iteration = 0;
    std::string repo_fingerprint;
    std::string summary_path;
    std::string report_path;
    std::vector<std::string> applied_patch_ids;
    std::vector<std::string> rejected_finding_ids;
    std::vector<std::string> suppressed_finding_ids;  // test-rejected, never retried
    std::vector<std::string> metrics_history;         // comparison report paths
    PipelineStatus status = PipelineStatus::running;
    std::string failure_stage;  // non-empty only when status == failed
};

// Canonical JSON, atomic write.
void persist_state(const PipelineState& state, const std::string& path);

// Validates schema_version and structural invariants.
// Throws Error(SchemaVersionMismatch) / Error(CorruptState).
PipelineState load_state(const std::string& path);

// The four-stage loop. Never throws for per-stage failures; those surface
// as status == failed with the stage recorded.
PipelineState run_pipeline(const PipelineConfig& config);

// In-memory artifacts shared by the CLI subcommands.
struct SummaryArtifacts {
    CodeModel model;
    PatternCatalog patterns;
    ComponentGraph graph;
    BehaviorModel behavior;
    SystemSummary summary;
    std::vector<Diagnostic> diagnostics;
};

SummaryArtifacts build_summary_artifacts(const PipelineConfig& config);

// argv-style dispatch used by the CLI binary; returns the process exit code
// (0 success, 1 pipeline failure, 2 usage error).
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace sysopt
