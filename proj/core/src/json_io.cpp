#include "sysopt/json_io.hpp"

#include <json.hpp>

#include "sysopt/behavior.hpp"
#include "sysopt/error.hpp"

namespace sysopt {

using nlohmann::json;

namespace {

json span_to_json(const SourceSpan& span) {
    return json{{"path", span.path},
                {"start_line", span.start_line},
                {"end_line", span.end_line},
                {"start_col", span.start_col},
                {"end_col", span.end_col}};
}

SourceSpan span_from_json(const json& j) {
    SourceSpan s;
    s.path = j.at("path").get<std::string>();
    s.start_line = j.at("start_line").get<int>();
    s.end_line = j.at("end_line").get<int>();
    s.start_col = j.at("start_col").get<int>();
    s.end_col = j.at("end_col").get<int>();
    return s;
}

json spans_to_json(const std::vector<SourceSpan>& spans) {
    json arr = json::array();
    for (const auto& s : spans) arr.push_back(span_to_json(s));
    return arr;
}

std::vector<SourceSpan> spans_from_json(const json& j) {
    std::vector<SourceSpan> out;
    for (const auto& e : j) out.push_back(span_from_json(e));
    return out;
}

ComponentLevel level_from_string(const std::string& s) {
    if (s == "service") return ComponentLevel::service;
    if (s == "package") return ComponentLevel::package;
    if (s == "class") return ComponentLevel::class_;
    if (s == "method") return ComponentLevel::method;
    throw Error(ErrorCode::corrupt_state, "unknown component level: " + s);
}

ComponentRole role_from_string(const std::string& s) {
    if (s == "service_endpoint") return ComponentRole::service_endpoint;
    if (s == "data_access") return ComponentRole::data_access;
    if (s == "integration_interface") return ComponentRole::integration_interface;
    if (s == "internal") return ComponentRole::internal;
    if (s == "unknown") return ComponentRole::unknown;
    throw Error(ErrorCode::corrupt_state, "unknown component role: " + s);
}

EndpointKind endpoint_kind_from_string(const std::string& s) {
    if (s == "http") return EndpointKind::http;
    if (s == "internal_api") return EndpointKind::internal_api;
    throw Error(ErrorCode::corrupt_state, "unknown endpoint kind: " + s);
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "call_based") return EdgeKind::call_based;
    if (s == "type_based") return EdgeKind::type_based;
    if (s == "resource_based") return EdgeKind::resource_based;
    throw Error(ErrorCode::corrupt_state, "unknown edge kind: " + s);
}

SiteKind site_kind_from_string(const std::string& s) {
    if (s == "service_call") return SiteKind::service_call;
    if (s == "db_access") return SiteKind::db_access;
    if (s == "external") return SiteKind::external;
    throw Error(ErrorCode::corrupt_state, "unknown site kind: " + s);
}

json graph_to_json(const ComponentGraph& graph) {
    json comps = json::array();
    for (const auto& [id, c] : graph.components) {
        comps.push_back(json{{"id", c.id},
                             {"level", to_string(c.level)},
                             {"display_name", c.display_name},
                             {"parent_id", c.parent_id},
                             {"role", to_string(c.role)},
                             {"evidence", spans_to_json(c.evidence)}});
    }
    json eps = json::array();
    for (const auto& e : graph.endpoints) {
        eps.push_back(json{{"component_id", e.component_id},
                           {"kind", to_string(e.kind)},
                           {"route", e.route},
                           {"http_method", e.http_method},
                           {"evidence", span_to_json(e.evidence)}});
    }
    json edges = json::array();
    for (const auto& e : graph.edges) {
        edges.push_back(json{{"from_id", e.from_id},
                             {"to_id", e.to_id},
                             {"kind", to_string(e.kind)},
                             {"weight", e.weight},
                             {"evidence", spans_to_json(e.evidence)}});
    }
    return json{{"components", comps},
                {"endpoints", eps},
                {"edges", edges},
                {"service_count", graph.service_count},
                {"class_count", graph.class_count},
                {"method_count", graph.method_count}};
}

ComponentGraph graph_from_json(const json& j) {
    ComponentGraph g;
    for (const auto& cj : j.at("components")) {
        Component c;
        c.id = cj.at("id").get<std::string>();
        c.level = level_from_string(cj.at("level").get<std::string>());
        c.display_name = cj.at("display_name").get<std::string>();
        c.parent_id = cj.at("parent_id").get<std::string>();
        c.role = role_from_string(cj.at("role").get<std::string>());
        c.evidence = spans_from_json(cj.at("evidence"));
        g.components.emplace(c.id, std::move(c));
    }
    for (const auto& ej : j.at("endpoints")) {
        Endpoint e;
        e.component_id = ej.at("component_id").get<std::string>();
        e.kind = endpoint_kind_from_string(ej.at("kind").get<std::string>());
        e.route = ej.at("route").get<std::string>();
        e.http_method = ej.at("http_method").get<std::string>();
        e.evidence = span_from_json(ej.at("evidence"));
        g.endpoints.push_back(std::move(e));
    }
    for (const auto& ej : j.at("edges")) {
        DependencyEdge e;
        e.from_id = ej.at("from_id").get<std::string>();
        e.to_id = ej.at("to_id").get<std::string>();
        e.kind = edge_kind_from_string(ej.at("kind").get<std::string>());
        e.weight = ej.at("weight").get<int>();
        e.evidence = spans_from_json(ej.at("evidence"));
        g.edges.push_back(std::move(e));
    }
    g.service_count = j.at("service_count").get<int>();
    g.class_count = j.at("class_count").get<int>();
    g.method_count = j.at("method_count").get<int>();
    return g;
}

json behavior_to_json(const BehaviorModel& b) {
    json edges = json::array();
    for (const auto& e : b.call_graph.edges) {
        edges.push_back(json{{"caller_id", e.caller_id},
                             {"callee_id", e.callee_id},
                             {"evidence", span_to_json(e.evidence)},
                             {"ambiguous", e.ambiguous}});
    }
    json sites = json::array();
    for (const auto& s : b.sites) {
        sites.push_back(json{{"id", s.id},
                             {"kind", to_string(s.kind)},
                             {"owner_method_id", s.owner_method_id},
                             {"matched_pattern", s.matched_pattern},
                             {"loop_depth", s.loop_depth},
                             {"evidence", span_to_json(s.evidence)},
                             {"fact_span", span_to_json(s.fact_span)},
                             {"is_allocation", s.is_allocation}});
    }
    json sync = json::array();
    for (const auto& s : b.sync) {
        sync.push_back(json{{"id", s.id},
                            {"form", to_string(s.form)},
                            {"owner_method_id", s.owner_method_id},
                            {"evidence", span_to_json(s.evidence)}});
    }
    json metrics = json::object();
    for (const auto& [id, m] : b.metrics) {
        metrics[id] = json{{"branch_count", m.branch_count},
                           {"loop_count", m.loop_count},
                           {"max_loop_depth", m.max_loop_depth},
                           {"call_fan_out", m.call_fan_out}};
    }
    return json{{"call_graph",
                 json{{"nodes", b.call_graph.nodes},
                      {"edges", edges},
                      {"roots", b.call_graph.roots},
                      {"unresolved_calls", b.call_graph.unresolved_calls}}},
                {"sites", sites},
                {"sync", sync},
                {"metrics", metrics}};
}

BehaviorModel behavior_from_json(const json& j) {
    BehaviorModel b;
    const json& cg = j.at("call_graph");
    b.call_graph.nodes = cg.at("nodes").get<std::vector<std::string>>();
    b.call_graph.roots = cg.at("roots").get<std::vector<std::string>>();
    b.call_graph.unresolved_calls = cg.at("unresolved_calls").get<int>();
    for (const auto& ej : cg.at("edges")) {
        CallGraphEdge e;
        e.caller_id = ej.at("caller_id").get<std::string>();
        e.callee_id = ej.at("callee_id").get<std::string>();
        e.evidence = span_from_json(ej.at("evidence"));
        e.ambiguous = ej.at("ambiguous").get<bool>();
        b.call_graph.edges.push_back(std::move(e));
    }
    for (const auto& sj : j.at("sites")) {
        InteractionSite s;
        s.id = sj.at("id").get<std::string>();
        s.kind = site_kind_from_string(sj.at("kind").get<std::string>());
        s.owner_method_id = sj.at("owner_method_id").get<std::string>();
        s.matched_pattern = sj.at("matched_pattern").get<std::string>();
        s.loop_depth = sj.at("loop_depth").get<int>();
        s.evidence = span_from_json(sj.at("evidence"));
        s.fact_span = span_from_json(sj.at("fact_span"));
        s.is_allocation = sj.at("is_allocation").get<bool>();
        b.sites.push_back(std::move(s));
    }
    for (const auto& sj : j.at("sync")) {
        SyncConstruct s;
        s.id = sj.at("id").get<std::string>();
        s.form = sj.at("form").get<std::string>() == "synchronized_method"
                     ? SyncForm::synchronized_method
                     : SyncForm::synchronized_block;
        s.owner_method_id = sj.at("owner_method_id").get<std::string>();
        s.evidence = span_from_json(sj.at("evidence"));
        b.sync.push_back(std::move(s));
    }
    for (auto it = j.at("metrics").begin(); it != j.at("metrics").end(); ++it) {
        FlowMetrics m;
        m.method_id = it.key();
        m.branch_count = it.value().at("branch_count").get<int>();
        m.loop_count = it.value().at("loop_count").get<int>();
        m.max_loop_depth = it.value().at("max_loop_depth").get<int>();
        m.call_fan_out = it.value().at("call_fan_out").get<int>();
        b.metrics.emplace(m.method_id, std::move(m));
    }
    return b;
}

json summary_to_json(const SystemSummary& s) {
    json per_service = json::array();
    for (const auto& a : s.component.per_service) {
        per_service.push_back(json{{"service_id", a.service_id},
                                   {"class_count", a.class_count},
                                   {"endpoint_count", a.endpoint_count},
                                   {"outbound_service_edges", a.outbound_service_edges},
                                   {"inbound_service_edges", a.inbound_service_edges}});
    }
    json hot_paths = json::array();
    for (const auto& h : s.behavior.hot_paths) {
        hot_paths.push_back(json{{"root_id", h.root_id},
                                 {"path_node_ids", h.path_node_ids},
                                 {"sites_on_path", h.sites_on_path},
                                 {"sync_on_path", h.sync_on_path}});
    }
    json deps = json::array();
    for (const auto& d : s.environment.dependencies) {
        deps.push_back(json{{"group", d.group}, {"artifact", d.artifact}, {"version", d.version}});
    }
    json configs = json::array();
    for (const auto& c : s.environment.config_entries) {
        configs.push_back(json{{"key", c.key}, {"value", c.value}, {"source_path", c.source_path}});
    }
    return json{
        {"schema_version", kSchemaVersion},
        {"component", json{{"graph", graph_to_json(s.component.graph)},
                           {"per_service", per_service}}},
        {"behavior", json{{"behavior", behavior_to_json(s.behavior.behavior)},
                          {"hot_paths", hot_paths}}},
        {"environment", json{{"language", s.environment.language},
                             {"language_version", s.environment.language_version},
                             {"dependencies", deps},
                             {"config_entries", configs},
                             {"build_files", s.environment.build_files}}},
        {"repo_fingerprint", s.repo_fingerprint},
        {"created_at", s.created_at}};
}

SystemSummary summary_from_json_obj(const json& j) {
    if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion) {
        throw Error(ErrorCode::schema_version_mismatch,
                    "system summary schema_version is not " + std::string(kSchemaVersion));
    }
    SystemSummary s;
    s.component.graph = graph_from_json(j.at("component").at("graph"));
    for (const auto& a : j.at("component").at("per_service")) {
        ServiceAggregate agg;
        agg.service_id = a.at("service_id").get<std::string>();
        agg.class_count = a.at("class_count").get<int>();
        agg.endpoint_count = a.at("endpoint_count").get<int>();
        agg.outbound_service_edges = a.at("outbound_service_edges").get<int>();
        agg.inbound_service_edges = a.at("inbound_service_edges").get<int>();
        s.component.per_service.push_back(std::move(agg));
    }
    s.behavior.behavior = behavior_from_json(j.at("behavior").at("behavior"));
    for (const auto& h : j.at("behavior").at("hot_paths")) {
        HotPath hp;
        hp.root_id = h.at("root_id").get<std::string>();
        hp.path_node_ids = h.at("path_node_ids").get<std::vector<std::string>>();
        hp.sites_on_path = h.at("sites_on_path").get<int>();
        hp.sync_on_path = h.at("sync_on_path").get<int>();
        s.behavior.hot_paths.push_back(std::move(hp));
    }
    const json& env = j.at("environment");
    s.environment.language = env.at("language").get<std::string>();
    s.environment.language_version = env.at("language_version").get<std::string>();
    for (const auto& d : env.at("dependencies")) {
        s.environment.dependencies.push_back({d.at("group").get<std::string>(),
                                              d.at("artifact").get<std::string>(),
                                              d.at("version").get<std::string>()});
    }
    for (const auto& c : env.at("config_entries")) {
        s.environment.config_entries.push_back({c.at("key").get<std::string>(),
                                                c.at("value").get<std::string>(),
                                                c.at("source_path").get<std::string>()});
    }
    s.environment.build_files = env.at("build_files").get<std::vector<std::string>>();
    s.repo_fingerprint = j.at("repo_fingerprint").get<std::string>();
    s.created_at = j.at("created_at").get<std::string>();
    return s;
}

Confidence confidence_from_string(const std::string& s) {
    if (s == "high") return Confidence::high;
    if (s == "medium") return Confidence::medium;
    if (s == "low") return Confidence::low;
    throw Error(ErrorCode::corrupt_state, "unknown confidence: " + s);
}

json finding_to_json(const Finding& f) {
    return json{{"id", f.id},
                {"rule_id", f.rule_id},
                {"title", f.title},
                {"interpretation", f.interpretation},
                {"suggestion", f.suggestion},
                {"evidence", spans_to_json(f.evidence)},
                {"owner_method_id", f.owner_method_id},
                {"owner_class_id", f.owner_class_id},
                {"matched_type", f.matched_type},
                {"sync_form", f.sync_form},
                {"reachable_root_count", f.reachable_root_count},
                {"loop_depth", f.loop_depth},
                {"base_severity", f.base_severity},
                {"impact_score", f.impact_score},
                {"confidence", to_string(f.confidence)},
                {"rank", f.rank}};
}

Finding finding_from_json(const json& j) {
    Finding f;
    f.id = j.at("id").get<std::string>();
    f.rule_id = j.at("rule_id").get<std::string>();
    f.title = j.at("title").get<std::string>();
    f.interpretation = j.at("interpretation").get<std::string>();
    f.suggestion = j.at("suggestion").get<std::string>();
    f.evidence = spans_from_json(j.at("evidence"));
    f.owner_method_id = j.at("owner_method_id").get<std::string>();
    f.owner_class_id = j.at("owner_class_id").get<std::string>();
    f.matched_type = j.at("matched_type").get<std::string>();
    f.sync_form = j.at("sync_form").get<std::string>();
    f.reachable_root_count = j.at("reachable_root_count").get<int>();
    f.loop_depth = j.at("loop_depth").get<int>();
    f.base_severity = j.at("base_severity").get<double>();
    f.impact_score = j.at("impact_score").get<double>();
    f.confidence = confidence_from_string(j.at("confidence").get<std::string>());
    f.rank = j.at("rank").get<int>();
    return f;
}

json report_to_json(const AnalysisReport& r) {
    json findings = json::array();
    for (const auto& f : r.findings) findings.push_back(finding_to_json(f));
    return json{{"schema_version", kSchemaVersion},
                {"findings", findings},
                {"candidate_files", r.candidate_files},
                {"risks", r.risks},
                {"gaps", r.gaps},
                {"summary_fingerprint", r.summary_fingerprint}};
}

AnalysisReport report_from_json_obj(const json& j) {
    AnalysisReport r;
    for (const auto& f : j.at("findings")) r.findings.push_back(finding_from_json(f));
    r.candidate_files = j.at("candidate_files").get<std::vector<std::string>>();
    r.risks = j.at("risks").get<std::vector<std::string>>();
    r.gaps = j.at("gaps").get<std::vector<std::string>>();
    r.summary_fingerprint = j.at("summary_fingerprint").get<std::string>();
    return r;
}

PatchStatus patch_status_from_string(const std::string& s) {
    if (s == "proposed") return PatchStatus::proposed;
    if (s == "applied") return PatchStatus::applied;
    if (s == "rejected_tests") return PatchStatus::rejected_tests;
    if (s == "rejected_breaking") return PatchStatus::rejected_breaking;
    if (s == "rejected_conflict") return PatchStatus::rejected_conflict;
    throw Error(ErrorCode::corrupt_state, "unknown patch status: " + s);
}

json metrics_to_json(const BenchmarkMetrics& m) {
    return json{{"total_requests", m.total_requests},
                {"success_count", m.success_count},
                {"throughput_rps", m.throughput_rps},
                {"avg_rt_ms", m.avg_rt_ms},
                {"p50_ms", m.p50_ms},
                {"p90_ms", m.p90_ms},
                {"p99_ms", m.p99_ms}};
}

BenchmarkMetrics metrics_from_json(const json& j) {
    BenchmarkMetrics m;
    m.total_requests = j.at("total_requests").get<int64_t>();
    m.success_count = j.at("success_count").get<int64_t>();
    m.throughput_rps = j.at("throughput_rps").get<double>();
    m.avg_rt_ms = j.at("avg_rt_ms").get<double>();
    m.p50_ms = j.at("p50_ms").get<int64_t>();
    m.p90_ms = j.at("p90_ms").get<int64_t>();
    m.p99_ms = j.at("p99_ms").get<int64_t>();
    return m;
}

json parse_or_throw(const std::string& text, ErrorCode code, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(code, std::string(what) + ": " + e.what());
    }
}

}  // namespace

std::string to_json_string(const ComponentGraph& graph) {
    return graph_to_json(graph).dump(2) + "\n";
}

std::string to_json_string(const BehaviorModel& behavior) {
    return behavior_to_json(behavior).dump(2) + "\n";
}

std::string to_json_string(const SystemSummary& summary) {
    return summary_to_json(summary).dump(2) + "\n";
}

std::string to_json_string(const AnalysisReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

std::string to_json_string(const PatchSet& set) {
    json patches = json::array();
    for (const auto& p : set.patches) {
        patches.push_back(json{{"finding_id", p.finding_id},
                               {"rule_id", p.rule_id},
                               {"target_path", p.target_path},
                               {"diff", p.diff},
                               {"justification", p.justification},
                               {"status", to_string(p.status)},
                               {"status_reason", p.status_reason}});
    }
    json j{{"schema_version", kSchemaVersion},
           {"patches", patches},
           {"base_fingerprint", set.base_fingerprint},
           {"iteration", set.iteration}};
    return j.dump(2) + "\n";
}

std::string to_json_string(const ComparisonReport& report) {
    json improvements = json::array();
    for (const auto& c : report.improvement) {
        improvements.push_back(json{{"metric", c.metric},
                                    {"original", c.original},
                                    {"optimized", c.optimized},
                                    {"change_pct", c.change_pct},
                                    {"change_pct_display", round2(c.change_pct)}});
    }
    json j{{"schema_version", kSchemaVersion},
           {"original", metrics_to_json(report.original)},
           {"optimized", metrics_to_json(report.optimized)},
           {"improvement", improvements}};
    return j.dump(2) + "\n";
}

std::string to_json_string(const PipelineState& state) {
    json j{{"schema_version", state.schema_version},
           {"iteration", state.iteration},
           {"repo_fingerprint", state.repo_fingerprint},
           {"summary_path", state.summary_path},
           {"report_path", state.report_path},
           {"applied_patch_ids", state.applied_patch_ids},
           {"rejected_finding_ids", state.rejected_finding_ids},
           {"suppressed_finding_ids", state.suppressed_finding_ids},
           {"metrics_history", state.metrics_history},
           {"status", to_string(state.status)},
           {"failure_stage", state.failure_stage}};
    return j.dump(2) + "\n";
}

SystemSummary system_summary_from_json(const std::string& text) {
    return summary_from_json_obj(
        parse_or_throw(text, ErrorCode::corrupt_state, "system summary"));
}

AnalysisReport analysis_report_from_json(const std::string& text) {
    return report_from_json_obj(
        parse_or_throw(text, ErrorCode::corrupt_state, "analysis report"));
}

PatchSet patch_set_from_json(const std::string& text) {
    json j = parse_or_throw(text, ErrorCode::corrupt_state, "patch set");
    PatchSet set;
    set.base_fingerprint = j.at("base_fingerprint").get<std::string>();
    set.iteration = j.at("iteration").get<int>();
    for (const auto& pj : j.at("patches")) {
        Patch p;
        p.finding_id = pj.at("finding_id").get<std::string>();
        p.rule_id = pj.at("rule_id").get<std::string>();
        p.target_path = pj.at("target_path").get<std::string>();
        p.diff = pj.at("diff").get<std::string>();
        p.justification = pj.at("justification").get<std::string>();
        p.status = patch_status_from_string(pj.at("status").get<std::string>());
        p.status_reason = pj.at("status_reason").get<std::string>();
        set.patches.push_back(std::move(p));
    }
    return set;
}

ComparisonReport comparison_report_from_json(const std::string& text) {
    json j = parse_or_throw(text, ErrorCode::corrupt_state, "comparison report");
    ComparisonReport r;
    r.original = metrics_from_json(j.at("original"));
    r.optimized = metrics_from_json(j.at("optimized"));
    for (const auto& c : j.at("improvement")) {
        MetricChange mc;
        mc.metric = c.at("metric").get<std::string>();
        mc.original = c.at("original").get<double>();
        mc.optimized = c.at("optimized").get<double>();
        mc.change_pct = c.at("change_pct").get<double>();
        r.improvement.push_back(std::move(mc));
    }
    return r;
}

PipelineState pipeline_state_from_json(const std::string& text) {
    json j = parse_or_throw(text, ErrorCode::corrupt_state, "pipeline state");
    if (!j.contains("schema_version")) {
        throw Error(ErrorCode::corrupt_state, "state file has no schema_version");
    }
    if (j.at("schema_version") != kSchemaVersion) {
        throw Error(ErrorCode::schema_version_mismatch,
                    "state schema_version " + j.at("schema_version").dump() + " != " +
                        kSchemaVersion + "; re-run summarize to migrate");
    }
    PipelineState s;
    s.schema_version = j.at("schema_version").get<std::string>();
    s.iteration = j.at("iteration").get<int>();
    s.repo_fingerprint = j.at("repo_fingerprint").get<std::string>();
    s.summary_path = j.at("summary_path").get<std::string>();
    s.report_path = j.at("report_path").get<std::string>();
    s.applied_patch_ids = j.at("applied_patch_ids").get<std::vector<std::string>>();
    s.rejected_finding_ids = j.at("rejected_finding_ids").get<std::vector<std::string>>();
    s.suppressed_finding_ids = j.at("suppressed_finding_ids").get<std::vector<std::string>>();
    s.metrics_history = j.at("metrics_history").get<std::vector<std::string>>();
    auto status = pipeline_status_from_string(j.at("status").get<std::string>());
    if (!status) {
        throw Error(ErrorCode::corrupt_state, "unknown status " + j.at("status").dump());
    }
    s.status = *status;
    s.failure_stage = j.at("failure_stage").get<std::string>();
    return s;
}

std::string trace_event_to_json_line(const TraceEvent& event) {
    json j{{"sequence", event.sequence},
           {"stage", event.stage},
           {"started_at", event.started_at},
           {"ended_at", event.ended_at},
           {"outcome", event.outcome},
           {"artifact_paths", event.artifact_paths}};
    return j.dump() + "\n";
}

}  // namespace sysopt
