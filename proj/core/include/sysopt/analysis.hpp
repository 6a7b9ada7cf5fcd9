#pragma once

#include <string>
#include <vector>

#include "sysopt/catalog.hpp"
#include "sysopt/code_model.hpp"
#include "sysopt/summary.hpp"

namespace sysopt {

enum class Confidence { high, medium, low };

const char* to_string(Confidence c);
int confidence_order(Confidence c);  // high=2, medium=1, low=0

struct Finding {
    std::string id;  // stable hash of (rule_id, primary evidence span)
    std::string rule_id;
    std::string title;
    std::string interpretation;
    std::string suggestion;
    std::vector<SourceSpan> evidence;  // non-empty; first entry is primary
    std::string owner_method_id;
    int reachable_root_count = 0;
    int loop_depth = 0;
    double base_severity = 0.0;
    double impact_score = 0.0;
    Confidence confidence = Confidence::medium;
    int rank = 0;  // 1-based after ranking

    // Context for downstream patch generation.
    std::string owner_class_id;
    std::string matched_type;  // catalog name (R1/R3/R4)
    std::string sync_form;     // R2 only
};

struct Rule {
    std::string rule_id;
    std::string description;
    double base_severity = 1.0;  // in (0, 10]
    std::string title_template;
    std::string interpretation_template;
    std::string suggestion_template;
};

struct RuleCatalog {
    std::vector<Rule> rules;

    // Built-in rules R1..R4 with severities taken from the pattern catalog.
    static RuleCatalog defaults(const PatternCatalog& patterns);
    const Rule* find(const std::string& rule_id) const;
};

struct AnalysisReport {
    std::vector<Finding> findings;  // rank-ordered
    std::vector<std::string> candidate_files;
    std::vector<std::string> risks;
    std::vector<std::string> gaps;
    std::string summary_fingerprint;
};

// Evaluates the built-in rules against the summary. The code model supplies
// allocation facts and constructor information that the summary's
// interaction sites do not carry.
std::vector<Finding> detect_findings(const SystemSummary& summary, const RuleCatalog& rules,
                                     const PatternCatalog& patterns, const CodeModel& model);

// impact = base_severity * log2(1 + reachable_root_count) * (1 + loop_depth);
// sorted by (impact desc, confidence desc, evidence path asc, line asc).
std::vector<Finding> rank_findings(std::vector<Finding> findings);

AnalysisReport build_report(std::vector<Finding> ranked, const SystemSummary& summary,
                            const std::vector<Diagnostic>& diagnostics = {});

std::string render_report_text(const AnalysisReport& report);

}  // namespace sysopt
