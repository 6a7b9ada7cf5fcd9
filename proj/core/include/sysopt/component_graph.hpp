#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sysopt/catalog.hpp"
#include "sysopt/code_model.hpp"
#include "sysopt/span.hpp"

namespace sysopt {

enum class ComponentLevel { service, package, class_, method };
enum class ComponentRole { service_endpoint, data_access, integration_interface, internal, unknown };
enum class EndpointKind { http, internal_api };
enum class EdgeKind { call_based, type_based, resource_based };

const char* to_string(ComponentLevel level);
const char* to_string(ComponentRole role);
const char* to_string(EndpointKind kind);
const char* to_string(EdgeKind kind);

struct Component {
    std::string id;  // level-prefixed: service:auth, package:auth/a.b, class:a.b.C, method:a.b.C#m(int)
    ComponentLevel level = ComponentLevel::service;
    std::string display_name;
    std::string parent_id;  // empty only for services
    ComponentRole role = ComponentRole::unknown;
    std::vector<SourceSpan> evidence;
};

struct Endpoint {
    std::string component_id;  // owning method component
    EndpointKind kind = EndpointKind::http;
    std::string route;
    std::string http_method;
    SourceSpan evidence;
};

struct DependencyEdge {
    std::string from_id;
    std::string to_id;
    EdgeKind kind = EdgeKind::call_based;
    int weight = 0;  // always equals evidence.size()
    std::vector<SourceSpan> evidence;
};

struct ComponentGraph {
    std::map<std::string, Component> components;
    std::vector<Endpoint> endpoints;
    std::vector<DependencyEdge> edges;
    int service_count = 0;
    int class_count = 0;
    int method_count = 0;

    const Component* find(const std::string& id) const;
    // Walks parents up to the owning service id; empty when unknown.
    std::string service_of(const std::string& id) const;
};

// A service is a directory below the repo root that directly contains the
// marker file. Files assigned to the nearest such ancestor; files outside
// every service root fall back to the synthetic `default` service.
struct ServiceBoundaryRule {
    std::string marker_name = "pom.xml";
    std::vector<std::string> marker_dirs;  // repo-relative, sorted

    static constexpr const char* default_service = "default";
};

ServiceBoundaryRule discover_service_roots(const std::string& repo_root,
                                           const std::string& marker_name = "pom.xml");

// Service directory for a repo-relative file path. Sets `ambiguous` when
// the file sits under more than one marker directory (the lexicographically
// first one is returned).
std::string service_for_path(const ServiceBoundaryRule& rule, const std::string& path,
                             bool* ambiguous = nullptr);

ComponentGraph build_inventory(const CodeModel& model, const ServiceBoundaryRule& rule,
                               std::vector<Diagnostic>* diagnostics = nullptr);

std::vector<Endpoint> detect_endpoints(const CodeModel& model, const PatternCatalog& catalog);

std::vector<DependencyEdge> derive_dependencies(const CodeModel& model,
                                                const ComponentGraph& graph,
                                                const PatternCatalog& catalog);

std::string method_component_id(const MethodDecl& method);
std::string class_component_id(const TypeDecl& type);

struct InteractionSite;

// Assigns architectural roles to class and method components. Precedence:
// service_endpoint > data_access > integration_interface > internal.
ComponentGraph classify_roles(ComponentGraph graph, const std::vector<InteractionSite>& sites);

}  // namespace sysopt
