#pragma once

#include <string>

#include "sysopt/analysis.hpp"
#include "sysopt/evaluation.hpp"
#include "sysopt/patching.hpp"
#include "sysopt/pipeline.hpp"
#include "sysopt/summary.hpp"

namespace sysopt {

// Canonical JSON: object keys sorted, list orders fixed at build time,
// two-space indentation. Equal values serialize to identical bytes.

std::string to_json_string(const ComponentGraph& graph);
std::string to_json_string(const BehaviorModel& behavior);
std::string to_json_string(const SystemSummary& summary);
std::string to_json_string(const AnalysisReport& report);
std::string to_json_string(const PatchSet& set);
std::string to_json_string(const ComparisonReport& report);
std::string to_json_string(const PipelineState& state);

SystemSummary system_summary_from_json(const std::string& text);
AnalysisReport analysis_report_from_json(const std::string& text);
PatchSet patch_set_from_json(const std::string& text);
ComparisonReport comparison_report_from_json(const std::string& text);
PipelineState pipeline_state_from_json(const std::string& text);

// Line-delimited JSON for the trace log.
std::string trace_event_to_json_line(const TraceEvent& event);

}  // namespace sysopt
