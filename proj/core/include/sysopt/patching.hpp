#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sysopt/analysis.hpp"
#include "sysopt/catalog.hpp"
#include "sysopt/code_model.hpp"

namespace sysopt {

enum class PatchStatus { proposed, applied, rejected_tests, rejected_breaking, rejected_conflict };

const char* to_string(PatchStatus status);

struct Patch {
    std::string finding_id;
    std::string rule_id;
    std::string target_path;  // single file per patch
    std::string diff;         // unified diff against the pristine file
    std::string justification;
    PatchStatus status = PatchStatus::proposed;
    std::string status_reason;
};

struct PatchSet {
    std::vector<Patch> patches;
    std::string base_fingerprint;  // repo fingerprint the set was generated against
    int iteration = 1;
};

struct BackendSelector {
    enum class Mode { deterministic, remote } mode = Mode::deterministic;
    std::string remote_url;  // required for Mode::remote
    double timeout_s = 10.0;
};

struct NonBreakingVerdict {
    bool ok = false;
    std::string reason;  // first violated clause when !ok
};

// Rule-specific non-breaking transformation for R1/R2/R3 findings.
// Throws Error(NotApplicable) when the rule has no safe transformation for
// this finding, and Error(StaleEvidence) when `workspace_root` is given and
// the target file on disk no longer matches the analyzed sources.
Patch generate_patch(const Finding& finding, const CodeModel& model,
                     const std::string& workspace_root = "");

struct SkippedFinding {
    std::string finding_id;
    std::string reason;
};

struct GeneratedPatches {
    PatchSet set;
    std::vector<SkippedFinding> skipped;
};

// Patches for every finding in rank order. Findings that share
// (rule, class, type) with an earlier patch are skipped; NotApplicable and
// StaleEvidence findings are recorded in `skipped`.
GeneratedPatches generate_patchset(const std::vector<Finding>& findings, const CodeModel& model,
                                   int iteration, const std::string& workspace_root = "");

// ok iff the multiset of public/protected signatures, the endpoint set and
// every public field survive the change.
NonBreakingVerdict verify_non_breaking(const CodeModel& before, const CodeModel& after,
                                       const PatternCatalog& catalog);

struct ApplyOutcome {
    std::vector<Patch> applied;
    std::vector<Patch> rejected;
    CodeModel model;  // state of the workspace after application
};

// Applies patches in order against `workspace_root`, re-verifying each one
// (clean hunk application, re-parse, non-breaking gate). Failures are
// marked rejected_conflict/rejected_breaking and skipped; each patch is
// all-or-nothing. Throws Error(FingerprintMismatch) when the workspace no
// longer matches set.base_fingerprint.
ApplyOutcome apply_patchset(const PatchSet& set, const std::string& workspace_root,
                            const CodeModel& current, const PatternCatalog& catalog);

// POST {schema_version, system_summary, analysis_report} to the remote
// backend; expects {patches: [{finding_id, diff, justification}]}.
// Throws Error(RemoteTimeout) / Error(RemoteProtocolError); a malformed
// response body yields an empty set plus a diagnostic.
PatchSet request_remote_patches(const AnalysisReport& report, const SystemSummary& summary,
                                const BackendSelector& selector, int iteration,
                                std::vector<Diagnostic>* diagnostics = nullptr);

}  // namespace sysopt
