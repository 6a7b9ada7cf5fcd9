#include "sysopt/behavior.hpp"

#include <algorithm>
#include <deque>

#include "sysopt/error.hpp"
#include "sysopt/fingerprint.hpp"

namespace sysopt {

const char* to_string(SiteKind kind) {
    switch (kind) {
        case SiteKind::service_call: return "service_call";
        case SiteKind::db_access: return "db_access";
        case SiteKind::external: return "external";
    }
    return "service_call";
}

const char* to_string(SyncForm form) {
    return form == SyncForm::synchronized_method ? "synchronized_method" : "synchronized_block";
}

bool CallGraph::has_node(const std::string& id) const {
    return std::binary_search(nodes.begin(), nodes.end(), id);
}

namespace {

bool arity_matches(const MethodDecl& m, int argc) {
    size_t n = m.parameters.size();
    if (!m.parameters.empty() && m.parameters.back().type.find("...") != std::string::npos) {
        return argc >= static_cast<int>(n) - 1;
    }
    return argc == static_cast<int>(n);
}

std::vector<const TypeDecl*> resolve_type_name(const CodeModel& model, const std::string& name) {
    std::vector<const TypeDecl*> out;
    if (name.find('.') != std::string::npos) {
        if (const TypeDecl* exact = model.find_type(name)) {
            out.push_back(exact);
            return out;
        }
    }
    return model.types_with_simple_name(simple_type_name(name));
}

}  // namespace

CallResolution resolve_call(const CodeModel& model, const CallFact& call) {
    CallResolution res;
    if (!call.receiver_hint.empty()) {
        std::set<std::string> owner_names;
        for (const TypeDecl* td : resolve_type_name(model, call.receiver_hint)) {
            for (const std::string& q : model.supertype_closure(td->qualified_name)) {
                owner_names.insert(q);
            }
        }
        for (const std::string& q : owner_names) {
            const TypeDecl* td = model.find_type(q);
            if (!td) continue;
            for (const MethodDecl& m : td->methods) {
                if (m.name == call.callee && arity_matches(m, call.arg_count)) {
                    res.targets.push_back(&m);
                }
            }
        }
    } else {
        for (const SourceUnit& u : model.units) {
            for (const TypeDecl& td : u.types) {
                for (const MethodDecl& m : td.methods) {
                    if (m.name == call.callee && arity_matches(m, call.arg_count)) {
                        res.targets.push_back(&m);
                    }
                }
            }
        }
    }
    std::sort(res.targets.begin(), res.targets.end(),
              [](const MethodDecl* a, const MethodDecl* b) {
                  return a->signature_key < b->signature_key;
              });
    res.ambiguous = res.targets.size() > 1;
    return res;
}

CallGraph build_call_graph(const CodeModel& model, const std::vector<Endpoint>& entrypoints,
                           std::vector<Diagnostic>* diagnostics) {
    CallGraph graph;

    std::set<std::string> roots;
    for (const Endpoint& e : entrypoints) roots.insert(e.component_id);
    graph.roots.assign(roots.begin(), roots.end());
    if (graph.roots.empty() && diagnostics) {
        diagnostics->push_back({Severity::warning, "", 0, 0, "no-entry-points",
                                "no entry points found; call graph is empty"});
    }

    std::map<std::string, const MethodDecl*> by_id;
    for (const SourceUnit& u : model.units) {
        for (const TypeDecl& td : u.types) {
            for (const MethodDecl& m : td.methods) {
                by_id[method_component_id(m)] = &m;
            }
        }
    }

    std::set<std::string> visited;
    std::map<std::pair<std::string, std::string>, CallGraphEdge> edges;
    std::deque<std::string> work(graph.roots.begin(), graph.roots.end());

    while (!work.empty()) {
        std::string id = work.front();
        work.pop_front();
        if (!visited.insert(id).second) continue;
        auto it = by_id.find(id);
        if (it == by_id.end()) continue;
        for (const CallFact& call : it->second->facts.calls) {
            CallResolution res = resolve_call(model, call);
            if (res.targets.empty()) {
                ++graph.unresolved_calls;
                continue;
            }
            for (const MethodDecl* target : res.targets) {
                std::string callee_id = method_component_id(*target);
                auto key = std::make_pair(id, callee_id);
                auto [pos, inserted] =
                    edges.emplace(key, CallGraphEdge{id, callee_id, call.span, res.ambiguous});
                if (!inserted && res.ambiguous) pos->second.ambiguous = true;
                if (!visited.count(callee_id)) work.push_back(callee_id);
            }
        }
    }

    graph.nodes.assign(visited.begin(), visited.end());
    std::sort(graph.nodes.begin(), graph.nodes.end());
    for (auto& [key, edge] : edges) graph.edges.push_back(edge);
    return graph;
}

std::vector<InteractionSite> detect_interaction_sites(const CodeModel& model,
                                                      const PatternCatalog& catalog) {
    if (!catalog.has_interaction_names()) {
        throw Error(ErrorCode::empty_catalog, "catalog provides no interaction-site names");
    }

    struct SetRef {
        SiteKind kind;
        const std::vector<std::string>* names;
    };
    // First matching set wins: service_call > db_access > external.
    const SetRef sets[] = {
        {SiteKind::service_call, &catalog.service_call_types},
        {SiteKind::db_access, &catalog.db_access_types},
        {SiteKind::external, &catalog.external_types},
    };

    std::vector<InteractionSite> out;
    auto add_site = [&](SiteKind kind, const std::string& pattern,
                        const MethodDecl& owner, int loop_depth, const SourceSpan& evidence,
                        const SourceSpan& fact_span, bool is_alloc) {
        InteractionSite s;
        s.kind = kind;
        s.matched_pattern = pattern;
        s.owner_method_id = method_component_id(owner);
        s.loop_depth = loop_depth;
        s.evidence = evidence;
        s.fact_span = fact_span;
        s.is_allocation = is_alloc;
        s.id = "site:" + fnv1a64_hex(fact_span.path + ":" + std::to_string(fact_span.start_line) +
                                     ":" + std::to_string(fact_span.start_col) + ":" +
                                     to_string(kind) + ":" + pattern);
        out.push_back(std::move(s));
    };

    auto lookup = [&](const std::string& type_text,
                      SiteKind* kind_out) -> const std::string* {
        if (type_text.empty() || type_text.find("[]") != std::string::npos) return nullptr;
        std::string simple = simple_type_name(type_text);
        for (const SetRef& s : sets) {
            for (const std::string& name : *s.names) {
                if (simple == name) {
                    *kind_out = s.kind;
                    return &name;
                }
            }
        }
        return nullptr;
    };

    for (const SourceUnit& u : model.units) {
        for (const TypeDecl& td : u.types) {
            for (const MethodDecl& m : td.methods) {
                for (const CallFact& c : m.facts.calls) {
                    SiteKind kind;
                    if (const std::string* name = lookup(c.receiver_hint, &kind)) {
                        SourceSpan evidence = c.span;
                        // The span must contain the matched type name; calls
                        // through variables point at the receiver's declaration.
                        if (slice_span(model.sources.count(u.span.path)
                                           ? model.sources.at(u.span.path)
                                           : std::string{},
                                       evidence)
                                .find(*name) == std::string::npos) {
                            evidence = c.hint_decl_span ? *c.hint_decl_span : m.span;
                        }
                        add_site(kind, *name, m, c.loop_depth, evidence, c.span, false);
                    }
                }
                for (const AllocFact& a : m.facts.allocations) {
                    SiteKind kind;
                    if (const std::string* name = lookup(a.constructed_type, &kind)) {
                        add_site(kind, *name, m, a.loop_depth, a.span, a.span, true);
                    }
                }
            }
        }
    }
    return out;
}

std::vector<SyncConstruct> detect_sync_constructs(const CodeModel& model) {
    std::vector<SyncConstruct> out;
    auto add = [&](SyncForm form, const MethodDecl& owner, const SourceSpan& evidence) {
        SyncConstruct s;
        s.form = form;
        s.owner_method_id = method_component_id(owner);
        s.evidence = evidence;
        s.id = "sync:" + fnv1a64_hex(evidence.path + ":" + std::to_string(evidence.start_line) +
                                     ":" + std::to_string(evidence.start_col) + ":" +
                                     to_string(form));
        out.push_back(std::move(s));
    };
    for (const SourceUnit& u : model.units) {
        for (const TypeDecl& td : u.types) {
            for (const MethodDecl& m : td.methods) {
                if (m.is_synchronized) add(SyncForm::synchronized_method, m, m.span);
                for (const SourceSpan& b : m.facts.sync_blocks) {
                    add(SyncForm::synchronized_block, m, b);
                }
            }
        }
    }
    return out;
}

std::set<std::string> reachable_roots(const CallGraph& graph, const std::string& method_id) {
    std::set<std::string> result;
    if (!graph.has_node(method_id)) return result;

    std::map<std::string, std::vector<std::string>> reverse;
    for (const CallGraphEdge& e : graph.edges) reverse[e.callee_id].push_back(e.caller_id);
    std::set<std::string> root_set(graph.roots.begin(), graph.roots.end());

    std::set<std::string> seen;
    std::deque<std::string> work{method_id};
    while (!work.empty()) {
        std::string id = work.front();
        work.pop_front();
        if (!seen.insert(id).second) continue;
        if (root_set.count(id)) result.insert(id);
        auto it = reverse.find(id);
        if (it == reverse.end()) continue;
        for (const std::string& caller : it->second) {
            if (!seen.count(caller)) work.push_back(caller);
        }
    }
    return result;
}

std::map<std::string, FlowMetrics> compute_flow_metrics(const CodeModel& model) {
    std::map<std::string, FlowMetrics> out;
    for (const SourceUnit& u : model.units) {
        for (const TypeDecl& td : u.types) {
            for (const MethodDecl& m : td.methods) {
                FlowMetrics fm;
                fm.method_id = method_component_id(m);
                fm.branch_count = m.facts.branch_count;
                fm.loop_count = m.facts.loop_count;
                fm.max_loop_depth = m.facts.max_loop_depth;
                std::set<std::pair<std::string, int>> callees;
                for (const CallFact& c : m.facts.calls) {
                    callees.emplace(c.callee, c.arg_count);
                }
                fm.call_fan_out = static_cast<int>(callees.size());
                out[fm.method_id] = fm;
            }
        }
    }
    return out;
}

BehaviorModel build_behavior_model(const CodeModel& model, const std::vector<Endpoint>& entrypoints,
                                   const PatternCatalog& catalog,
                                   std::vector<Diagnostic>* diagnostics) {
    BehaviorModel bm;
    bm.call_graph = build_call_graph(model, entrypoints, diagnostics);
    bm.sites = detect_interaction_sites(model, catalog);
    bm.sync = detect_sync_constructs(model);
    bm.metrics = compute_flow_metrics(model);
    return bm;
}

}  // namespace sysopt
