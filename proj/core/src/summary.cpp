#include "sysopt/summary.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>

#include "sysopt/error.hpp"
#include "sysopt/fs.hpp"
#include "sysopt/glob.hpp"

namespace sysopt {

std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02uZ", tm.tm_year + 1900,
                  static_cast<unsigned>(tm.tm_mon + 1), static_cast<unsigned>(tm.tm_mday),
                  static_cast<unsigned>(tm.tm_hour), static_cast<unsigned>(tm.tm_min),
                  static_cast<unsigned>(tm.tm_sec));
    return buf;
}

namespace {

// Minimal tag scanner: returns the text between <tag> and </tag> starting
// at `from`. Sets `found` and advances `from` past the close tag.
std::string next_tag_block(const std::string& text, const std::string& tag, size_t& from,
                           bool& found, bool& malformed) {
    found = false;
    malformed = false;
    std::string open = "<" + tag + ">";
    std::string close = "</" + tag + ">";
    size_t start = text.find(open, from);
    if (start == std::string::npos) return {};
    size_t body = start + open.size();
    size_t end = text.find(close, body);
    if (end == std::string::npos) {
        malformed = true;
        return {};
    }
    from = end + close.size();
    found = true;
    return text.substr(body, end - body);
}

std::string first_tag_value(const std::string& text, const std::string& tag) {
    size_t from = 0;
    bool found = false, malformed = false;
    std::string v = next_tag_block(text, tag, from, found, malformed);
    if (!found) return {};
    // Trim surrounding whitespace.
    size_t a = v.find_first_not_of(" \t\r\n");
    size_t b = v.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    return v.substr(a, b - a + 1);
}

void scan_pom(const std::string& path, const std::string& text, EnvironmentSummary& env,
              std::vector<Diagnostic>* diagnostics) {
    size_t from = 0;
    for (;;) {
        bool found = false, malformed = false;
        std::string block = next_tag_block(text, "dependency", from, found, malformed);
        if (malformed) {
            if (diagnostics) {
                diagnostics->push_back({Severity::warning, path, 1, 1, "malformed-build-file",
                                        "unclosed <dependency> element; file skipped"});
            }
            return;
        }
        if (!found) break;
        DependencyCoordinate dep;
        dep.group = first_tag_value(block, "groupId");
        dep.artifact = first_tag_value(block, "artifactId");
        dep.version = first_tag_value(block, "version");
        if (dep.group.empty() || dep.artifact.empty()) continue;
        bool duplicate = false;
        for (const DependencyCoordinate& existing : env.dependencies) {
            if (existing.group == dep.group && existing.artifact == dep.artifact &&
                existing.version == dep.version) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) env.dependencies.push_back(std::move(dep));
    }
    if (env.language_version.empty()) {
        env.language_version = first_tag_value(text, "maven.compiler.release");
    }
}

void scan_properties(const std::string& path, const std::string& text, EnvironmentSummary& env) {
    std::string line;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        line = text.substr(pos, eol - pos);
        pos = eol + 1;
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        if (line[a] == '#' || line[a] == '!') continue;
        size_t eq = line.find('=', a);
        if (eq == std::string::npos) continue;
        std::string key = line.substr(a, eq - a);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            size_t x = s.find_first_not_of(" \t\r");
            size_t y = s.find_last_not_of(" \t\r");
            s = (x == std::string::npos) ? std::string{} : s.substr(x, y - x + 1);
        };
        trim(key);
        trim(value);
        if (key.empty()) continue;
        env.config_entries.push_back({key, value, path});
    }
}

}  // namespace

EnvironmentSummary summarize_environment(const std::string& root,
                                         std::vector<Diagnostic>* diagnostics) {
    EnvironmentSummary env;
    for (const std::string& rel : list_files_recursive(root)) {
        bool is_pom = rel == "pom.xml" || glob_match("**/pom.xml", rel);
        bool is_props = glob_match("**/*.properties", rel) || glob_match("*.properties", rel);
        if (!is_pom && !is_props) continue;
        auto text = read_file(join_path(root, rel));
        if (!text) {
            if (diagnostics) {
                diagnostics->push_back({Severity::warning, rel, 0, 0, "malformed-build-file",
                                        "build file not readable"});
            }
            continue;
        }
        env.build_files.push_back(rel);
        if (is_pom) scan_pom(rel, *text, env, diagnostics);
        else scan_properties(rel, *text, env);
    }
    return env;
}

namespace {

struct PathSearch {
    const std::map<std::string, std::vector<std::string>>& adjacency;
    const std::map<std::string, int>& site_weight;
    const std::map<std::string, int>& sync_weight;
    int max_length;
    long budget;  // node expansions left; keeps worst cases bounded

    std::vector<std::string> best_path;
    int best_sites = -1;

    std::vector<std::string> current;
    std::set<std::string> on_path;
    int current_sites = 0;

    int weight_of(const std::map<std::string, int>& m, const std::string& id) const {
        auto it = m.find(id);
        return it == m.end() ? 0 : it->second;
    }

    void dfs(const std::string& node) {
        if (budget-- <= 0) return;
        current.push_back(node);
        on_path.insert(node);
        current_sites += weight_of(site_weight, node);

        if (current_sites > best_sites) {
            best_sites = current_sites;
            best_path = current;
        }
        if (static_cast<int>(current.size()) < max_length) {
            auto it = adjacency.find(node);
            if (it != adjacency.end()) {
                for (const std::string& next : it->second) {
                    if (on_path.count(next)) continue;  // cycle cutting
                    dfs(next);
                }
            }
        }
        current_sites -= weight_of(site_weight, node);
        on_path.erase(node);
        current.pop_back();
    }
};

}  // namespace

SystemSummary build_system_summary(const ComponentGraph& graph, const BehaviorModel& behavior,
                                   const EnvironmentSummary& environment,
                                   const std::string& repo_fingerprint,
                                   const SummaryOptions& options,
                                   const std::string& created_at) {
    auto known = [&](const std::string& id) { return graph.components.count(id) > 0; };
    for (const std::string& node : behavior.call_graph.nodes) {
        if (!known(node)) {
            throw Error(ErrorCode::inconsistent_inputs,
                        "behavior references unknown component " + node);
        }
    }
    for (const InteractionSite& s : behavior.sites) {
        if (!known(s.owner_method_id)) {
            throw Error(ErrorCode::inconsistent_inputs,
                        "interaction site references unknown component " + s.owner_method_id);
        }
    }
    for (const SyncConstruct& s : behavior.sync) {
        if (!known(s.owner_method_id)) {
            throw Error(ErrorCode::inconsistent_inputs,
                        "sync construct references unknown component " + s.owner_method_id);
        }
    }

    SystemSummary summary;
    summary.component.graph = graph;
    summary.behavior.behavior = behavior;
    summary.environment = environment;
    summary.repo_fingerprint = repo_fingerprint;
    summary.created_at = created_at.empty() ? iso8601_utc_now() : created_at;

    // Per-service aggregates.
    std::map<std::string, ServiceAggregate> per_service;
    for (const auto& [id, c] : graph.components) {
        if (c.level == ComponentLevel::service) {
            per_service[id].service_id = id;
        }
    }
    for (const auto& [id, c] : graph.components) {
        if (c.level != ComponentLevel::class_) continue;
        std::string svc = graph.service_of(id);
        if (!svc.empty()) ++per_service[svc].class_count;
    }
    for (const Endpoint& e : graph.endpoints) {
        std::string svc = graph.service_of(e.component_id);
        if (!svc.empty()) ++per_service[svc].endpoint_count;
    }
    for (const DependencyEdge& e : graph.edges) {
        const Component* from = graph.find(e.from_id);
        if (!from || from->level != ComponentLevel::service) continue;
        ++per_service[e.from_id].outbound_service_edges;
        ++per_service[e.to_id].inbound_service_edges;
    }
    for (auto& [id, agg] : per_service) summary.component.per_service.push_back(agg);

    // Hot paths: per root, the maximal-site path under DFS with cycle cutting.
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const CallGraphEdge& e : behavior.call_graph.edges) {
        adjacency[e.caller_id].push_back(e.callee_id);
    }
    for (auto& [id, neighbors] : adjacency) std::sort(neighbors.begin(), neighbors.end());

    std::map<std::string, int> site_weight, sync_weight;
    for (const InteractionSite& s : behavior.sites) ++site_weight[s.owner_method_id];
    for (const SyncConstruct& s : behavior.sync) ++sync_weight[s.owner_method_id];

    std::vector<HotPath> paths;
    for (const std::string& root : behavior.call_graph.roots) {
        PathSearch search{adjacency, site_weight, sync_weight,
                          options.max_hot_path_length, 20000, {}, -1, {}, {}, 0};
        search.dfs(root);
        HotPath hp;
        hp.root_id = root;
        hp.path_node_ids = search.best_path;
        hp.sites_on_path = std::max(0, search.best_sites);
        for (const std::string& node : search.best_path) {
            auto it = sync_weight.find(node);
            if (it != sync_weight.end()) hp.sync_on_path += it->second;
        }
        paths.push_back(std::move(hp));
    }
    std::stable_sort(paths.begin(), paths.end(), [](const HotPath& a, const HotPath& b) {
        if (a.sites_on_path != b.sites_on_path) return a.sites_on_path > b.sites_on_path;
        return a.root_id < b.root_id;
    });
    if (static_cast<int>(paths.size()) > options.max_hot_path_roots) {
        paths.resize(static_cast<size_t>(options.max_hot_path_roots));
    }
    summary.behavior.hot_paths = std::move(paths);
    return summary;
}

}  // namespace sysopt
