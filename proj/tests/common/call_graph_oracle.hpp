#pragma once

// Brute-force call-graph oracle: enumerates every (CallFact, MethodDecl)
// pair, applies the resolution rule exhaustively, then computes
// reachability with naive fixpoint iteration. Kept independent of
// build_call_graph: no indexes, no shared traversal code.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sysopt/code_model.hpp"
#include "sysopt/component_graph.hpp"

namespace testutil {

struct OracleGraph {
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;
    std::set<std::string> roots;
};

inline bool oracle_arity_ok(const sysopt::MethodDecl& m, int argc) {
    size_t n = m.parameters.size();
    if (!m.parameters.empty() && m.parameters.back().type.find("...") != std::string::npos) {
        return argc >= static_cast<int>(n) - 1;
    }
    return argc == static_cast<int>(n);
}

inline OracleGraph oracle_call_graph(const sysopt::CodeModel& model,
                                     const std::vector<sysopt::Endpoint>& endpoints) {
    using sysopt::CallFact;
    using sysopt::MethodDecl;
    using sysopt::TypeDecl;

    OracleGraph g;
    for (const auto& e : endpoints) g.roots.insert(e.component_id);

    struct Entry {
        const TypeDecl* owner;
        const MethodDecl* method;
    };
    std::vector<Entry> all;
    for (const auto& unit : model.units) {
        for (const auto& td : unit.types) {
            for (const auto& m : td.methods) all.push_back({&td, &m});
        }
    }

    std::map<std::string, std::set<std::string>> callees;
    for (const Entry& entry : all) {
        std::string from = "method:" + entry.method->signature_key;
        for (const CallFact& call : entry.method->facts.calls) {
            bool restricted = !call.receiver_hint.empty();
            std::set<std::string> allowed_owners;
            if (restricted) {
                std::string simple = sysopt::simple_type_name(call.receiver_hint);
                for (const auto& unit : model.units) {
                    for (const auto& td : unit.types) {
                        if (td.name == simple || td.qualified_name == call.receiver_hint) {
                            allowed_owners.insert(td.qualified_name);
                        }
                    }
                }
                // Textual supertype closure by fixpoint.
                bool grew = true;
                while (grew) {
                    grew = false;
                    for (const auto& unit : model.units) {
                        for (const auto& td : unit.types) {
                            if (!allowed_owners.count(td.qualified_name)) continue;
                            for (const std::string& sup : td.supertypes) {
                                for (const auto& u2 : model.units) {
                                    for (const auto& t2 : u2.types) {
                                        if (t2.qualified_name == sup ||
                                            t2.name == sysopt::simple_type_name(sup)) {
                                            if (allowed_owners.insert(t2.qualified_name).second) {
                                                grew = true;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            for (const Entry& target : all) {
                if (target.method->name != call.callee) continue;
                if (!oracle_arity_ok(*target.method, call.arg_count)) continue;
                if (restricted && !allowed_owners.count(target.owner->qualified_name)) continue;
                callees[from].insert("method:" + target.method->signature_key);
            }
        }
    }

    std::set<std::string> reach = g.roots;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [from, tos] : callees) {
            if (!reach.count(from)) continue;
            for (const std::string& to : tos) {
                if (reach.insert(to).second) grew = true;
            }
        }
    }
    g.nodes = reach;
    for (const auto& [from, tos] : callees) {
        if (!reach.count(from)) continue;
        for (const std::string& to : tos) g.edges.emplace(from, to);
    }
    return g;
}

}  // namespace testutil
