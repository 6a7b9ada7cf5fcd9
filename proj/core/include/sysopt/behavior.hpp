#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sysopt/catalog.hpp"
#include "sysopt/code_model.hpp"
#include "sysopt/component_graph.hpp"

namespace sysopt {

struct CallGraphEdge {
    std::string caller_id;
    std::string callee_id;
    SourceSpan evidence;  // first call site that produced the edge
    bool ambiguous = false;
};

struct CallGraph {
    std::vector<std::string> nodes;  // method component ids, sorted
    std::vector<CallGraphEdge> edges;
    std::vector<std::string> roots;
    int unresolved_calls = 0;

    bool has_node(const std::string& id) const;
};

enum class SiteKind { service_call, db_access, external };
enum class SyncForm { synchronized_method, synchronized_block };

const char* to_string(SiteKind kind);
const char* to_string(SyncForm form);

struct InteractionSite {
    std::string id;
    SiteKind kind = SiteKind::service_call;
    std::string owner_method_id;
    std::string matched_pattern;  // catalog name that matched
    int loop_depth = 0;
    // Contains the matched catalog name; for calls through variables this
    // points at the receiver's type declaration.
    SourceSpan evidence;
    // The call/allocation itself.
    SourceSpan fact_span;
    bool is_allocation = false;
};

struct SyncConstruct {
    std::string id;
    SyncForm form = SyncForm::synchronized_method;
    std::string owner_method_id;
    SourceSpan evidence;
};

struct FlowMetrics {
    std::string method_id;
    int branch_count = 0;
    int loop_count = 0;
    int max_loop_depth = 0;
    int call_fan_out = 0;  // distinct (callee name, arity) pairs
};

struct BehaviorModel {
    CallGraph call_graph;
    std::vector<InteractionSite> sites;
    std::vector<SyncConstruct> sync;
    std::map<std::string, FlowMetrics> metrics;  // method component id -> metrics
};

// Resolution rule: match by method simple name and arity; a receiver-type
// hint restricts candidates to that class and its textual supertypes.
// More than one surviving candidate makes the resolution ambiguous.
struct CallResolution {
    std::vector<const MethodDecl*> targets;
    bool ambiguous = false;
};

CallResolution resolve_call(const CodeModel& model, const CallFact& call);

CallGraph build_call_graph(const CodeModel& model, const std::vector<Endpoint>& entrypoints,
                           std::vector<Diagnostic>* diagnostics = nullptr);

// Throws Error(EmptyCatalog) when the catalog provides no interaction names.
std::vector<InteractionSite> detect_interaction_sites(const CodeModel& model,
                                                      const PatternCatalog& catalog);

std::vector<SyncConstruct> detect_sync_constructs(const CodeModel& model);

// Exactly the roots from which method_id is reachable; a root reaches itself.
std::set<std::string> reachable_roots(const CallGraph& graph, const std::string& method_id);

std::map<std::string, FlowMetrics> compute_flow_metrics(const CodeModel& model);

BehaviorModel build_behavior_model(const CodeModel& model, const std::vector<Endpoint>& entrypoints,
                                   const PatternCatalog& catalog,
                                   std::vector<Diagnostic>* diagnostics = nullptr);

}  // namespace sysopt
