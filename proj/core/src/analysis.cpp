#include "sysopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "sysopt/behavior.hpp"
#include "sysopt/fingerprint.hpp"

namespace sysopt {

const char* to_string(Confidence c) {
    switch (c) {
        case Confidence::high: return "high";
        case Confidence::medium: return "medium";
        case Confidence::low: return "low";
    }
    return "medium";
}

int confidence_order(Confidence c) {
    switch (c) {
        case Confidence::high: return 2;
        case Confidence::medium: return 1;
        case Confidence::low: return 0;
    }
    return 1;
}

RuleCatalog RuleCatalog::defaults(const PatternCatalog& patterns) {
    auto severity = [&](const char* id, double fallback) {
        auto it = patterns.rule_severities.find(id);
        return it == patterns.rule_severities.end() ? fallback : it->second;
    };
    RuleCatalog cat;
    cat.rules.push_back(Rule{
        "R1",
        "client-per-call: a service-client type is constructed on a request path",
        severity("R1", 6.0),
        "{type} constructed per call in {method}",
        "Each invocation of {method} constructs a new {type}, so every request pays client "
        "and connection-pool setup costs again instead of reusing pooled connections.",
        "Construct one shared {type} in a static final field (SHARED_CLIENT) and read it at "
        "every call site; the instance stays thread-safe after configuration.",
    });
    cat.rules.push_back(Rule{
        "R2",
        "sync-on-request-path: a lock is taken on a request-critical path",
        severity("R2", 5.0),
        "synchronization on request path in {method}",
        "{method} holds a lock while handling request traffic; concurrent requests serialize "
        "here and tail latency grows under load even when the guarded state is a simple flag.",
        "When the body only assigns and reads primitive flag fields, drop the synchronized "
        "modifier and mark the written fields volatile to keep visibility without contention.",
    });
    cat.rules.push_back(Rule{
        "R3",
        "alloc-per-request: a stateless serializer is allocated per request",
        severity("R3", 4.0),
        "{type} allocated per request in {method}",
        "{method} builds a fresh {type} on every call; the instance is stateless after "
        "configuration, so per-request construction only adds allocation and GC pressure.",
        "Hoist the {type} into a shared static final field and reuse it across requests.",
    });
    cat.rules.push_back(Rule{
        "R4",
        "interaction-in-loop: a boundary interaction runs inside a loop",
        severity("R4", 7.0),
        "{kind} interaction inside loop in {method}",
        "{method} crosses a component boundary ({type}) inside a loop at depth {depth}; the "
        "boundary cost multiplies with the iteration count of every request.",
        "Batch the per-iteration work or hoist the interaction out of the loop so each "
        "request crosses the boundary a constant number of times.",
    });
    return cat;
}

const Rule* RuleCatalog::find(const std::string& rule_id) const {
    for (const Rule& r : rules) {
        if (r.rule_id == rule_id) return &r;
    }
    return nullptr;
}

namespace {

std::string fill_template(std::string text, const std::map<std::string, std::string>& vars) {
    for (const auto& [key, value] : vars) {
        std::string needle = "{" + key + "}";
        size_t pos = 0;
        while ((pos = text.find(needle, pos)) != std::string::npos) {
            text.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return text;
}

std::string display_method(const std::string& method_id) {
    constexpr const char* prefix = "method:";
    if (method_id.rfind(prefix, 0) == 0) return method_id.substr(7);
    return method_id;
}

CallGraph unambiguous_subgraph(const CallGraph& graph) {
    CallGraph g;
    g.roots = graph.roots;
    g.nodes = graph.nodes;
    for (const CallGraphEdge& e : graph.edges) {
        if (!e.ambiguous) g.edges.push_back(e);
    }
    return g;
}

struct DetectionContext {
    const SystemSummary& summary;
    const CodeModel& model;
    CallGraph unambiguous;
    std::map<std::string, std::vector<std::string>> class_methods;  // class id -> method ids

    explicit DetectionContext(const SystemSummary& s, const CodeModel& m)
        : summary(s), model(m), unambiguous(unambiguous_subgraph(s.behavior.behavior.call_graph)) {
        for (const auto& [id, c] : s.component.graph.components) {
            if (c.level == ComponentLevel::method) {
                class_methods[c.parent_id].push_back(id);
            }
        }
    }

    const CallGraph& graph() const { return summary.behavior.behavior.call_graph; }

    std::set<std::string> roots_of(const std::string& method_id, bool unambiguous_only) const {
        return reachable_roots(unambiguous_only ? unambiguous : graph(), method_id);
    }

    // Constructor bodies count as reachable when any method of the class is.
    std::set<std::string> class_roots(const std::string& class_id, bool unambiguous_only) const {
        std::set<std::string> roots;
        auto it = class_methods.find(class_id);
        if (it == class_methods.end()) return roots;
        for (const std::string& mid : it->second) {
            auto r = roots_of(mid, unambiguous_only);
            roots.insert(r.begin(), r.end());
        }
        return roots;
    }

    bool is_constructor(const std::string& method_id) const {
        const MethodDecl* m = model.find_method(display_method(method_id));
        return m && m->is_constructor;
    }

    std::string class_of(const std::string& method_id) const {
        const Component* c = summary.component.graph.find(method_id);
        return c ? c->parent_id : std::string{};
    }

    bool in_default_service(const std::string& component_id) const {
        return summary.component.graph.service_of(component_id) ==
               std::string("service:") + ServiceBoundaryRule::default_service;
    }

    // Reachability for a fact owner, applying the constructor rule.
    struct Reach {
        std::set<std::string> roots;
        bool unambiguous = false;
    };
    Reach reach_of(const std::string& method_id) const {
        Reach r;
        if (is_constructor(method_id)) {
            std::string cls = class_of(method_id);
            r.roots = class_roots(cls, false);
            r.unambiguous = !class_roots(cls, true).empty();
        } else {
            r.roots = roots_of(method_id, false);
            r.unambiguous = !roots_of(method_id, true).empty();
        }
        return r;
    }

    Confidence confidence_for(const std::string& method_id, const Reach& reach) const {
        if (in_default_service(method_id)) return Confidence::low;
        return reach.unambiguous ? Confidence::high : Confidence::medium;
    }
};

std::string finding_id(const std::string& rule_id, const SourceSpan& primary) {
    return rule_id + ":" +
           fnv1a64_hex(rule_id + "|" + primary.path + "|" + std::to_string(primary.start_line) +
                       "|" + std::to_string(primary.start_col));
}

Finding make_finding(const Rule& rule, const DetectionContext& ctx,
                     const std::string& owner_method_id, const SourceSpan& evidence,
                     int loop_depth, const std::string& matched_type,
                     const std::string& extra_kind) {
    DetectionContext::Reach reach = ctx.reach_of(owner_method_id);
    Finding f;
    f.rule_id = rule.rule_id;
    f.base_severity = rule.base_severity;
    f.owner_method_id = owner_method_id;
    f.owner_class_id = ctx.class_of(owner_method_id);
    f.evidence.push_back(evidence);
    f.id = finding_id(rule.rule_id, evidence);
    f.loop_depth = loop_depth;
    f.matched_type = matched_type;
    f.reachable_root_count = static_cast<int>(reach.roots.size());
    f.confidence = ctx.confidence_for(owner_method_id, reach);

    std::map<std::string, std::string> vars{
        {"type", matched_type},
        {"method", display_method(owner_method_id)},
        {"class", f.owner_class_id.rfind("class:", 0) == 0 ? f.owner_class_id.substr(6)
                                                           : f.owner_class_id},
        {"depth", std::to_string(loop_depth)},
        {"kind", extra_kind},
    };
    f.title = fill_template(rule.title_template, vars);
    f.interpretation = fill_template(rule.interpretation_template, vars);
    f.suggestion = fill_template(rule.suggestion_template, vars);
    return f;
}

}  // namespace

std::vector<Finding> detect_findings(const SystemSummary& summary, const RuleCatalog& rules,
                                     const PatternCatalog& patterns, const CodeModel& model) {
    DetectionContext ctx(summary, model);
    std::vector<Finding> out;

    const BehaviorModel& behavior = summary.behavior.behavior;

    // R1 client-per-call: allocation of a service-call type on a request path.
    if (const Rule* r1 = rules.find("R1")) {
        for (const InteractionSite& site : behavior.sites) {
            if (site.kind != SiteKind::service_call || !site.is_allocation) continue;
            DetectionContext::Reach reach = ctx.reach_of(site.owner_method_id);
            if (reach.roots.empty()) continue;
            Finding f = make_finding(*r1, ctx, site.owner_method_id, site.evidence,
                                     site.loop_depth, site.matched_pattern, "service_call");
            out.push_back(std::move(f));
        }
    }

    // R2 sync-on-request-path: a sync construct whose owner is reachable.
    if (const Rule* r2 = rules.find("R2")) {
        for (const SyncConstruct& sync : behavior.sync) {
            std::set<std::string> roots = ctx.roots_of(sync.owner_method_id, false);
            if (roots.empty()) continue;
            Finding f = make_finding(*r2, ctx, sync.owner_method_id, sync.evidence, 0, "",
                                     to_string(sync.form));
            f.sync_form = to_string(sync.form);
            out.push_back(std::move(f));
        }
    }

    // R3 alloc-per-request: stateless serializer allocated on a request path.
    if (const Rule* r3 = rules.find("R3")) {
        std::set<std::string> serializers(patterns.stateless_serializers.begin(),
                                          patterns.stateless_serializers.end());
        for (const SourceUnit& unit : model.units) {
            for (const TypeDecl& td : unit.types) {
                for (const MethodDecl& m : td.methods) {
                    for (const AllocFact& alloc : m.facts.allocations) {
                        std::string simple = simple_type_name(alloc.constructed_type);
                        if (alloc.constructed_type.find("[]") != std::string::npos) continue;
                        if (!serializers.count(simple)) continue;
                        std::string mid = method_component_id(m);
                        DetectionContext::Reach reach = ctx.reach_of(mid);
                        if (reach.roots.empty()) continue;
                        out.push_back(make_finding(*r3, ctx, mid, alloc.span, alloc.loop_depth,
                                                   simple, "allocation"));
                    }
                }
            }
        }
    }

    // R4 interaction-in-loop: any boundary interaction at loop depth >= 1.
    if (const Rule* r4 = rules.find("R4")) {
        for (const InteractionSite& site : behavior.sites) {
            if (site.loop_depth < 1) continue;
            DetectionContext::Reach reach = ctx.reach_of(site.owner_method_id);
            if (reach.roots.empty()) continue;
            Finding f = make_finding(*r4, ctx, site.owner_method_id, site.fact_span,
                                     site.loop_depth, site.matched_pattern,
                                     to_string(site.kind));
            if (!(site.evidence == site.fact_span)) f.evidence.push_back(site.evidence);
            out.push_back(std::move(f));
        }
    }

    return out;
}

std::vector<Finding> rank_findings(std::vector<Finding> findings) {
    for (Finding& f : findings) {
        f.impact_score = f.base_severity * std::log2(1.0 + f.reachable_root_count) *
                         (1.0 + f.loop_depth);
    }
    std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        if (a.impact_score != b.impact_score) return a.impact_score > b.impact_score;
        int ca = confidence_order(a.confidence), cb = confidence_order(b.confidence);
        if (ca != cb) return ca > cb;
        const SourceSpan& ea = a.evidence.front();
        const SourceSpan& eb = b.evidence.front();
        if (ea.path != eb.path) return ea.path < eb.path;
        if (ea.start_line != eb.start_line) return ea.start_line < eb.start_line;
        if (ea.start_col != eb.start_col) return ea.start_col < eb.start_col;
        return a.id < b.id;  // total order for determinism
    });
    for (size_t i = 0; i < findings.size(); ++i) findings[i].rank = static_cast<int>(i + 1);
    return findings;
}

AnalysisReport build_report(std::vector<Finding> ranked, const SystemSummary& summary,
                            const std::vector<Diagnostic>& diagnostics) {
    AnalysisReport report;
    report.summary_fingerprint = summary.repo_fingerprint;

    std::set<std::string> seen_files;
    for (const Finding& f : ranked) {
        for (const SourceSpan& span : f.evidence) {
            if (seen_files.insert(span.path).second) {
                report.candidate_files.push_back(span.path);
            }
        }
        if (f.rule_id == "R2") {
            report.risks.push_back(
                "Removing synchronization from " + display_method(f.owner_method_id) +
                " changes concurrency behavior: volatile keeps visibility but not atomicity "
                "of compound actions.");
        }
    }

    report.gaps.push_back(
        "unresolved_calls: " +
        std::to_string(summary.behavior.behavior.call_graph.unresolved_calls));
    for (const Diagnostic& d : diagnostics) {
        if (d.code == "construct-skipped" || d.code == "anon-class-skipped" ||
            d.code == "unreadable-source" || d.code == "duplicate-type" ||
            d.code == "unbalanced-braces") {
            report.gaps.push_back(d.to_line());
        }
    }

    report.findings = std::move(ranked);
    return report;
}

std::string render_report_text(const AnalysisReport& report) {
    std::ostringstream os;
    os << "findings: " << report.findings.size() << "\n";
    for (const Finding& f : report.findings) {
        const SourceSpan& e = f.evidence.front();
        os << "  #" << f.rank << " [" << f.rule_id << "] " << f.title << "\n"
           << "      impact " << f.impact_score << ", confidence " << to_string(f.confidence)
           << ", roots " << f.reachable_root_count << ", depth " << f.loop_depth << "\n"
           << "      at " << e.path << ":" << e.start_line << ":" << e.start_col << "\n";
    }
    if (!report.candidate_files.empty()) {
        os << "candidate files:\n";
        for (const auto& p : report.candidate_files) os << "  " << p << "\n";
    }
    if (!report.risks.empty()) {
        os << "risks:\n";
        for (const auto& r : report.risks) os << "  " << r << "\n";
    }
    os << "gaps:\n";
    for (const auto& g : report.gaps) os << "  " << g << "\n";
    return os.str();
}

}  // namespace sysopt
