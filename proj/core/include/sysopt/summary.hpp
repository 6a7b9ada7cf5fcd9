#pragma once

#include <string>
#include <vector>

#include "sysopt/behavior.hpp"
#include "sysopt/component_graph.hpp"
#include "sysopt/span.hpp"

namespace sysopt {

struct ServiceAggregate {
    std::string service_id;
    int class_count = 0;
    int endpoint_count = 0;
    int outbound_service_edges = 0;
    int inbound_service_edges = 0;
};

struct ComponentSummary {
    ComponentGraph graph;
    std::vector<ServiceAggregate> per_service;  // sorted by service_id
};

struct HotPath {
    std::string root_id;
    std::vector<std::string> path_node_ids;  // starts at root, follows call edges
    int sites_on_path = 0;
    int sync_on_path = 0;
};

struct BehaviorSummary {
    BehaviorModel behavior;
    std::vector<HotPath> hot_paths;
};

struct DependencyCoordinate {
    std::string group;
    std::string artifact;
    std::string version;
};

struct ConfigEntry {
    std::string key;
    std::string value;
    std::string source_path;
};

struct EnvironmentSummary {
    std::string language = "java-subset";
    std::string language_version;
    std::vector<DependencyCoordinate> dependencies;
    std::vector<ConfigEntry> config_entries;
    std::vector<std::string> build_files;
};

struct SystemSummary {
    ComponentSummary component;
    BehaviorSummary behavior;
    EnvironmentSummary environment;
    std::string repo_fingerprint;
    std::string created_at;  // ISO-8601 UTC
};

struct SummaryOptions {
    int max_hot_path_roots = 10;
    int max_hot_path_length = 32;
};

// Scans build descriptors under `root`: Maven-style pom.xml files (via a
// minimal tag scanner) and .properties files. Missing files yield empty
// lists; malformed descriptors are skipped with a diagnostic.
EnvironmentSummary summarize_environment(const std::string& root,
                                         std::vector<Diagnostic>* diagnostics = nullptr);

// Consolidates the per-agent views. Throws Error(InconsistentInputs) when
// the behavior model references methods missing from the component graph.
SystemSummary build_system_summary(const ComponentGraph& graph, const BehaviorModel& behavior,
                                   const EnvironmentSummary& environment,
                                   const std::string& repo_fingerprint,
                                   const SummaryOptions& options = {},
                                   const std::string& created_at = "");

std::string iso8601_utc_now();

}  // namespace sysopt
