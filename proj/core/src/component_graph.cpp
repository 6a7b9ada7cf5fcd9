#include "sysopt/component_graph.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <set>
#include <tuple>

#include "sysopt/behavior.hpp"
#include "sysopt/error.hpp"

namespace fs = std::filesystem;

namespace sysopt {

const char* to_string(ComponentLevel level) {
    switch (level) {
        case ComponentLevel::service: return "service";
        case ComponentLevel::package: return "package";
        case ComponentLevel::class_: return "class";
        case ComponentLevel::method: return "method";
    }
    return "service";
}

const char* to_string(ComponentRole role) {
    switch (role) {
        case ComponentRole::service_endpoint: return "service_endpoint";
        case ComponentRole::data_access: return "data_access";
        case ComponentRole::integration_interface: return "integration_interface";
        case ComponentRole::internal: return "internal";
        case ComponentRole::unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(EndpointKind kind) {
    return kind == EndpointKind::http ? "http" : "internal_api";
}

const char* to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::call_based: return "call_based";
        case EdgeKind::type_based: return "type_based";
        case EdgeKind::resource_based: return "resource_based";
    }
    return "call_based";
}

const Component* ComponentGraph::find(const std::string& id) const {
    auto it = components.find(id);
    return it == components.end() ? nullptr : &it->second;
}

std::string ComponentGraph::service_of(const std::string& id) const {
    std::string current = id;
    for (int hops = 0; hops < 8; ++hops) {
        const Component* c = find(current);
        if (!c) return {};
        if (c->level == ComponentLevel::service) return current;
        current = c->parent_id;
    }
    return {};
}

std::string method_component_id(const MethodDecl& method) {
    return "method:" + method.signature_key;
}

std::string class_component_id(const TypeDecl& type) {
    return "class:" + type.qualified_name;
}

ServiceBoundaryRule discover_service_roots(const std::string& repo_root,
                                           const std::string& marker_name) {
    ServiceBoundaryRule rule;
    rule.marker_name = marker_name;
    fs::path base(repo_root);
    if (!fs::exists(base)) return rule;
    for (auto it = fs::recursive_directory_iterator(base);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        if (it->path().filename().string() != marker_name) continue;
        fs::path dir = fs::relative(it->path().parent_path(), base);
        std::string rel = dir.generic_string();
        if (rel == ".") continue;  // a root-level marker describes the whole repo
        rule.marker_dirs.push_back(rel);
    }
    std::sort(rule.marker_dirs.begin(), rule.marker_dirs.end());
    return rule;
}

std::string service_for_path(const ServiceBoundaryRule& rule, const std::string& path,
                             bool* ambiguous) {
    if (ambiguous) *ambiguous = false;
    std::vector<std::string> matches;
    for (const std::string& dir : rule.marker_dirs) {
        if (path.size() > dir.size() && path.compare(0, dir.size(), dir) == 0 &&
            path[dir.size()] == '/') {
            matches.push_back(dir);
        }
    }
    if (matches.empty()) return ServiceBoundaryRule::default_service;
    if (matches.size() > 1 && ambiguous) *ambiguous = true;
    return *std::min_element(matches.begin(), matches.end());
}

ComponentGraph build_inventory(const CodeModel& model, const ServiceBoundaryRule& rule,
                               std::vector<Diagnostic>* diagnostics) {
    ComponentGraph graph;

    auto ensure_service = [&](const std::string& name) -> std::string {
        std::string id = "service:" + name;
        if (!graph.components.count(id)) {
            Component c;
            c.id = id;
            c.level = ComponentLevel::service;
            c.display_name = name;
            graph.components.emplace(id, std::move(c));
        }
        return id;
    };

    for (const SourceUnit& unit : model.units) {
        bool ambiguous = false;
        std::string service = service_for_path(rule, unit.span.path, &ambiguous);
        if (ambiguous && diagnostics) {
            diagnostics->push_back({Severity::warning, unit.span.path, 1, 1,
                                    "ambiguous-service-boundary",
                                    "file lies under more than one service root; assigned to " +
                                        service});
        }
        std::string service_id = ensure_service(service);

        std::string pkg_id = "package:" + service + "/" + unit.package_name;
        auto pit = graph.components.find(pkg_id);
        if (pit == graph.components.end()) {
            Component pc;
            pc.id = pkg_id;
            pc.level = ComponentLevel::package;
            pc.display_name = unit.package_name.empty() ? "(default)" : unit.package_name;
            pc.parent_id = service_id;
            pit = graph.components.emplace(pkg_id, std::move(pc)).first;
        }
        pit->second.evidence.push_back(unit.span);

        for (const TypeDecl& td : unit.types) {
            Component cc;
            cc.id = class_component_id(td);
            cc.level = ComponentLevel::class_;
            cc.display_name = td.name;
            cc.parent_id = pkg_id;
            cc.evidence.push_back(td.span);
            graph.components.emplace(cc.id, std::move(cc));

            for (const MethodDecl& m : td.methods) {
                Component mc;
                mc.id = method_component_id(m);
                mc.level = ComponentLevel::method;
                mc.display_name = m.name;
                mc.parent_id = class_component_id(td);
                mc.evidence.push_back(m.span);
                graph.components.emplace(mc.id, std::move(mc));
            }
        }
    }

    for (const auto& [id, c] : graph.components) {
        switch (c.level) {
            case ComponentLevel::service: ++graph.service_count; break;
            case ComponentLevel::class_: ++graph.class_count; break;
            case ComponentLevel::method: ++graph.method_count; break;
            case ComponentLevel::package: break;
        }
    }
    return graph;
}

namespace {

// Textual supertype names reachable from `td`, following declarations that
// resolve within the model and keeping unresolved names as plain text.
std::set<std::string> supertype_names(const CodeModel& model, const TypeDecl& td) {
    std::set<std::string> names;
    std::set<std::string> visited_types;
    std::vector<const TypeDecl*> work{&td};
    while (!work.empty()) {
        const TypeDecl* current = work.back();
        work.pop_back();
        if (!visited_types.insert(current->qualified_name).second) continue;
        for (const std::string& sup : current->supertypes) {
            names.insert(simple_type_name(sup));
            names.insert(sup);
            if (const TypeDecl* exact = model.find_type(sup)) {
                work.push_back(exact);
            } else {
                for (const TypeDecl* cand : model.types_with_simple_name(simple_type_name(sup))) {
                    work.push_back(cand);
                }
            }
        }
    }
    return names;
}

const AnnotationFact* find_annotation(const std::vector<AnnotationFact>& annotations,
                                      const std::string& name) {
    for (const AnnotationFact& a : annotations) {
        if (a.name == name || simple_type_name(a.name) == name) return &a;
    }
    return nullptr;
}

std::string join_route(const std::string& class_part, const std::string& method_part) {
    if (class_part.empty()) return method_part;
    if (method_part.empty()) return class_part;
    bool slash_a = !class_part.empty() && class_part.back() == '/';
    bool slash_b = !method_part.empty() && method_part.front() == '/';
    if (slash_a && slash_b) return class_part + method_part.substr(1);
    if (!slash_a && !slash_b) return class_part + "/" + method_part;
    return class_part + method_part;
}

}  // namespace

std::vector<Endpoint> detect_endpoints(const CodeModel& model, const PatternCatalog& catalog) {
    std::vector<Endpoint> out;
    std::set<std::string> have;  // method ids that already carry an endpoint

    std::set<std::string> verb_set(catalog.http_method_annotations.begin(),
                                   catalog.http_method_annotations.end());
    std::set<std::string> servlet_bases(catalog.servlet_bases.begin(),
                                        catalog.servlet_bases.end());
    std::set<std::string> internal_classes(catalog.internal_api_classes.begin(),
                                           catalog.internal_api_classes.end());

    auto add = [&](const MethodDecl& m, EndpointKind kind, const std::string& http_method,
                   const std::string& route, const SourceSpan& evidence) {
        std::string id = method_component_id(m);
        if (!have.insert(id + "|" + http_method).second) return;
        Endpoint e;
        e.component_id = id;
        e.kind = kind;
        e.http_method = http_method;
        e.route = route;
        e.evidence = evidence;
        out.push_back(std::move(e));
    };

    for (const SourceUnit& unit : model.units) {
        for (const TypeDecl& td : unit.types) {
            const AnnotationFact* class_path = find_annotation(td.annotations, "Path");
            const AnnotationFact* web_servlet = find_annotation(td.annotations, "WebServlet");
            std::string class_route;
            if (class_path && !class_path->string_arguments.empty()) {
                class_route = class_path->string_arguments[0];
            }
            std::string servlet_route;
            if (web_servlet && !web_servlet->string_arguments.empty()) {
                servlet_route = web_servlet->string_arguments[0];
            }

            bool is_servlet = false;
            if (web_servlet) is_servlet = true;
            if (!is_servlet) {
                for (const std::string& name : supertype_names(model, td)) {
                    if (servlet_bases.count(name) || servlet_bases.count(simple_type_name(name))) {
                        is_servlet = true;
                        break;
                    }
                }
            }

            bool is_internal_api = internal_classes.count(td.name) > 0 ||
                                   internal_classes.count(td.qualified_name) > 0;

            for (const MethodDecl& m : td.methods) {
                // JAX-RS style: verb annotation, route from @Path.
                for (const AnnotationFact& a : m.annotations) {
                    std::string simple = simple_type_name(a.name);
                    if (!verb_set.count(simple)) continue;
                    const AnnotationFact* method_path = find_annotation(m.annotations, "Path");
                    std::string method_route;
                    if (method_path && !method_path->string_arguments.empty()) {
                        method_route = method_path->string_arguments[0];
                    }
                    add(m, EndpointKind::http, simple, join_route(class_route, method_route),
                        a.span);
                }
                // Servlet style: public doGet/doPost/... of a servlet subclass.
                if (is_servlet && m.visibility == Visibility::public_v) {
                    static const std::pair<const char*, const char*> handlers[] = {
                        {"doGet", "GET"}, {"doPost", "POST"}, {"doPut", "PUT"},
                        {"doDelete", "DELETE"}, {"doHead", "HEAD"},
                    };
                    for (const auto& [name, verb] : handlers) {
                        if (m.name == name) {
                            add(m, EndpointKind::http, verb, servlet_route,
                                web_servlet ? web_servlet->span : m.span);
                        }
                    }
                }
                // Catalog-declared internal APIs: every public method.
                if (is_internal_api && m.visibility == Visibility::public_v && !m.is_constructor) {
                    add(m, EndpointKind::internal_api, "", "", m.span);
                }
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const Endpoint& a, const Endpoint& b) {
        return std::tie(a.component_id, a.http_method, a.route) <
               std::tie(b.component_id, b.http_method, b.route);
    });
    return out;
}

namespace {

struct EdgeAccumulator {
    std::map<std::tuple<int, std::string, std::string>, DependencyEdge> edges;

    void add(EdgeKind kind, const std::string& from, const std::string& to,
             const SourceSpan& evidence) {
        if (from == to || from.empty() || to.empty()) return;
        auto key = std::make_tuple(static_cast<int>(kind), from, to);
        auto it = edges.find(key);
        if (it == edges.end()) {
            DependencyEdge e;
            e.kind = kind;
            e.from_id = from;
            e.to_id = to;
            it = edges.emplace(key, std::move(e)).first;
        }
        it->second.evidence.push_back(evidence);
        it->second.weight = static_cast<int>(it->second.evidence.size());
    }
};

}  // namespace

std::vector<DependencyEdge> derive_dependencies(const CodeModel& model,
                                                const ComponentGraph& graph,
                                                const PatternCatalog& catalog) {
    EdgeAccumulator acc;

    auto parent_of = [&](const std::string& id) -> std::string {
        const Component* c = graph.find(id);
        return c ? c->parent_id : std::string{};
    };

    // Lifts a method- or class-level edge through the hierarchy.
    auto add_lifted = [&](EdgeKind kind, const std::string& from, const std::string& to,
                          const SourceSpan& evidence) {
        std::string f = from, t = to;
        while (!f.empty() && !t.empty()) {
            acc.add(kind, f, t, evidence);
            f = parent_of(f);
            t = parent_of(t);
        }
    };

    std::vector<std::string> resource_names;
    resource_names.insert(resource_names.end(), catalog.service_call_types.begin(),
                          catalog.service_call_types.end());
    resource_names.insert(resource_names.end(), catalog.db_access_types.begin(),
                          catalog.db_access_types.end());
    resource_names.insert(resource_names.end(), catalog.external_types.begin(),
                          catalog.external_types.end());
    auto is_resource_name = [&](const std::string& simple) {
        return std::find(resource_names.begin(), resource_names.end(), simple) !=
               resource_names.end();
    };

    auto resolve_class = [&](const std::string& name) -> const TypeDecl* {
        if (name.empty()) return nullptr;
        if (name.find('.') != std::string::npos) {
            if (const TypeDecl* exact = model.find_type(name)) return exact;
        }
        auto cands = model.types_with_simple_name(simple_type_name(name));
        return cands.size() == 1 ? cands[0] : nullptr;
    };

    for (const SourceUnit& unit : model.units) {
        for (const TypeDecl& td : unit.types) {
            std::string class_id = class_component_id(td);

            // type_based: fields, parameters, supertypes.
            for (const FieldDecl& f : td.fields) {
                if (const TypeDecl* target = resolve_class(f.declared_type)) {
                    add_lifted(EdgeKind::type_based, class_id, class_component_id(*target),
                               f.type_token_span);
                }
            }
            for (const std::string& sup : td.supertypes) {
                if (const TypeDecl* target = resolve_class(sup)) {
                    add_lifted(EdgeKind::type_based, class_id, class_component_id(*target),
                               td.span);
                }
            }

            for (const MethodDecl& m : td.methods) {
                std::string method_id = method_component_id(m);
                for (const Param& p : m.parameters) {
                    if (const TypeDecl* target = resolve_class(p.type)) {
                        add_lifted(EdgeKind::type_based, class_id, class_component_id(*target),
                                   m.span);
                    }
                }

                // call_based: resolved callees. The method-level edge keeps the
                // call site; lifted levels need a span that still contains the
                // target class's simple name, which for variable receivers is
                // the receiver's declaration.
                for (const CallFact& call : m.facts.calls) {
                    CallResolution res = resolve_call(model, call);
                    for (const MethodDecl* target : res.targets) {
                        const TypeDecl* target_owner = model.owner_of_method(target->signature_key);
                        acc.add(EdgeKind::call_based, method_id, method_component_id(*target),
                                call.span);
                        if (!target_owner) continue;
                        const std::string* src =
                            model.sources.count(unit.span.path)
                                ? &model.sources.at(unit.span.path)
                                : nullptr;
                        SourceSpan class_evidence = call.span;
                        if (src && slice_span(*src, class_evidence).find(target_owner->name) ==
                                       std::string::npos) {
                            if (call.hint_decl_span &&
                                slice_span(*src, *call.hint_decl_span).find(target_owner->name) !=
                                    std::string::npos) {
                                class_evidence = *call.hint_decl_span;
                            } else if (slice_span(*src, td.span).find(target_owner->name) !=
                                       std::string::npos) {
                                class_evidence = td.span;
                            }
                        }
                        add_lifted(EdgeKind::call_based, class_id,
                                   class_component_id(*target_owner), class_evidence);
                    }
                }

                // resource_based: interaction-catalog matches that land on a
                // class inside the model.
                for (const CallFact& call : m.facts.calls) {
                    std::string simple = simple_type_name(call.receiver_hint);
                    if (!is_resource_name(simple)) continue;
                    if (const TypeDecl* target = resolve_class(simple)) {
                        // Evidence points at the class declaration, which is
                        // guaranteed to contain the receiver's type text.
                        add_lifted(EdgeKind::resource_based, class_id,
                                   class_component_id(*target), td.span);
                    }
                }
                for (const AllocFact& alloc : m.facts.allocations) {
                    std::string simple = simple_type_name(alloc.constructed_type);
                    if (!is_resource_name(simple)) continue;
                    if (const TypeDecl* target = resolve_class(simple)) {
                        add_lifted(EdgeKind::resource_based, class_id,
                                   class_component_id(*target), alloc.span);
                    }
                }
            }
        }
    }

    std::vector<DependencyEdge> out;
    out.reserve(acc.edges.size());
    for (auto& [key, edge] : acc.edges) out.push_back(std::move(edge));
    return out;
}

ComponentGraph classify_roles(ComponentGraph graph, const std::vector<InteractionSite>& sites) {
    std::set<std::string> endpoint_methods;
    for (const Endpoint& e : graph.endpoints) endpoint_methods.insert(e.component_id);

    std::set<std::string> db_methods, call_methods;
    for (const InteractionSite& s : sites) {
        if (s.kind == SiteKind::db_access) db_methods.insert(s.owner_method_id);
        if (s.kind == SiteKind::service_call) call_methods.insert(s.owner_method_id);
    }

    auto role_for = [&](bool endpoint, bool db, bool call) {
        if (endpoint) return ComponentRole::service_endpoint;
        if (db) return ComponentRole::data_access;
        if (call) return ComponentRole::integration_interface;
        return ComponentRole::internal;
    };

    // Methods first, then classes aggregate their methods.
    std::map<std::string, std::array<bool, 3>> class_flags;
    for (auto& [id, c] : graph.components) {
        if (c.level != ComponentLevel::method) continue;
        bool ep = endpoint_methods.count(id) > 0;
        bool db = db_methods.count(id) > 0;
        bool call = call_methods.count(id) > 0;
        c.role = role_for(ep, db, call);
        auto& flags = class_flags[c.parent_id];
        flags[0] = flags[0] || ep;
        flags[1] = flags[1] || db;
        flags[2] = flags[2] || call;
    }
    for (auto& [id, c] : graph.components) {
        if (c.level != ComponentLevel::class_) continue;
        auto it = class_flags.find(id);
        if (it == class_flags.end()) {
            c.role = ComponentRole::internal;
        } else {
            c.role = role_for(it->second[0], it->second[1], it->second[2]);
        }
    }
    return graph;
}

}  // namespace sysopt
