#include <doctest.h>

#include <map>
#include <set>

#include "../common/call_graph_oracle.hpp"
#include "helpers.hpp"
#include "sysopt/behavior.hpp"
#include "sysopt/component_graph.hpp"
#include "sysopt/error.hpp"
#include "sysopt/parser.hpp"

using namespace sysopt;

namespace {

using testutil::OracleGraph;
using testutil::oracle_call_graph;

void check_oracle_equivalence(const std::string& repo_root) {
    CodeModel model = parse_repository(repo_root, RepoConfig{});
    REQUIRE(model.method_count() <= 50);
    std::vector<Endpoint> endpoints = detect_endpoints(model, PatternCatalog::defaults());
    CallGraph graph = build_call_graph(model, endpoints);
    OracleGraph oracle = oracle_call_graph(model, endpoints);

    std::set<std::string> nodes(graph.nodes.begin(), graph.nodes.end());
    std::set<std::string> roots(graph.roots.begin(), graph.roots.end());
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : graph.edges) edges.emplace(e.caller_id, e.callee_id);

    CHECK(nodes == oracle.nodes);
    CHECK(edges == oracle.edges);
    CHECK(roots == oracle.roots);
}

}  // namespace

TEST_CASE("call graph equals the brute-force oracle on the fixtures") {
    check_oracle_equivalence(testutil::fixture("teastore-mini"));
    check_oracle_equivalence(testutil::fixture("rules-corpus"));
    check_oracle_equivalence(testutil::fixture("single-service"));
}

TEST_CASE("chain reachability and unreachable methods") {
    testutil::TempDir dir("cg");
    write_file(dir.str() + "/w/App.java", R"(package w;
import javax.servlet.http.HttpServlet;
public class App extends HttpServlet {
    private Mid mid;
    public void doGet(Req q) { mid.a(q); }
})");
    write_file(dir.str() + "/w/Mid.java", R"(package w;
public class Mid {
    private Tail tail;
    public void a(Req q) { tail.b(q); }
})");
    write_file(dir.str() + "/w/Tail.java", R"(package w;
public class Tail {
    public void b(Req q) {}
    public void unreachable(Req q) { b(q); }
})");
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    std::vector<Endpoint> endpoints = detect_endpoints(model, PatternCatalog::defaults());
    CallGraph graph = build_call_graph(model, endpoints);

    CHECK(graph.nodes.size() == 3);  // root, a, b
    CHECK(graph.has_node("method:w.App#doGet(Req)"));
    CHECK(graph.has_node("method:w.Mid#a(Req)"));
    CHECK(graph.has_node("method:w.Tail#b(Req)"));
    CHECK_FALSE(graph.has_node("method:w.Tail#unreachable(Req)"));
    CHECK(graph.edges.size() == 2);

    auto roots_b = reachable_roots(graph, "method:w.Tail#b(Req)");
    REQUIRE(roots_b.size() == 1);
    CHECK(*roots_b.begin() == "method:w.App#doGet(Req)");

    CHECK(reachable_roots(graph, "method:w.Tail#unreachable(Req)").empty());
    // A root reaches itself.
    auto roots_root = reachable_roots(graph, "method:w.App#doGet(Req)");
    CHECK(roots_root.count("method:w.App#doGet(Req)") == 1);
}

TEST_CASE("recursion terminates and keeps a self-edge") {
    testutil::TempDir dir("rec");
    write_file(dir.str() + "/w/Loop.java", R"(package w;
import javax.servlet.http.HttpServlet;
public class Loop extends HttpServlet {
    public void doGet(Req q) { doGet(q); }
})");
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    CallGraph graph = build_call_graph(model, detect_endpoints(model, PatternCatalog::defaults()));
    REQUIRE(graph.nodes.size() == 1);
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].caller_id == graph.edges[0].callee_id);

    auto roots = reachable_roots(graph, graph.nodes[0]);
    CHECK(roots.size() == 1);

    // Two-cycle termination.
    testutil::TempDir dir2("rec2");
    write_file(dir2.str() + "/w/AB.java", R"(package w;
import javax.servlet.http.HttpServlet;
public class AB extends HttpServlet {
    public void doGet(Req q) { ping(q); }
    public void ping(Req q) { pong(q); }
    public void pong(Req q) { ping(q); }
})");
    CodeModel m2 = parse_repository(dir2.str(), RepoConfig{});
    CallGraph g2 = build_call_graph(m2, detect_endpoints(m2, PatternCatalog::defaults()));
    auto roots2 = reachable_roots(g2, "method:w.AB#pong(Req)");
    CHECK(roots2.size() == 1);
}

TEST_CASE("overload ambiguity produces edges to all candidates") {
    testutil::TempDir dir("amb2");
    write_file(dir.str() + "/w/Over.java", R"(package w;
import javax.servlet.http.HttpServlet;
public class Over extends HttpServlet {
    public void doGet(Req q) { m(q.value()); }
    public void m(int x) {}
    public void m(String x) {}
})");
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    CallGraph graph = build_call_graph(model, detect_endpoints(model, PatternCatalog::defaults()));
    int ambiguous_edges = 0;
    for (const auto& e : graph.edges) {
        if (e.ambiguous) ++ambiguous_edges;
    }
    CHECK(ambiguous_edges == 2);  // both overloads, each tagged
}

TEST_CASE("zero roots yields an empty graph with a warning") {
    testutil::TempDir dir("zero");
    write_file(dir.str() + "/w/Plain.java", "package w; public class Plain { void m() {} }");
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    std::vector<Diagnostic> diags;
    CallGraph graph = build_call_graph(model, {}, &diags);
    CHECK(graph.nodes.empty());
    CHECK(graph.edges.empty());
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "no-entry-points");
}

TEST_CASE("unresolved calls are counted, not guessed") {
    testutil::TempDir dir("unres");
    write_file(dir.str() + "/w/Ext.java", R"(package w;
import javax.servlet.http.HttpServlet;
public class Ext extends HttpServlet {
    private Mystery lib;
    public void doGet(Req q) { lib.vanish(q); local(); }
    private void local() {}
})");
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    CallGraph graph = build_call_graph(model, detect_endpoints(model, PatternCatalog::defaults()));
    CHECK(graph.unresolved_calls == 1);
    CHECK(graph.has_node("method:w.Ext#local()"));
}

TEST_CASE("interaction sites: catalog matching, precedence and evidence") {
    testutil::TempDir dir("sites");
    write_file(dir.str() + "/w/S.java", R"(package w;
import javax.persistence.EntityManager;
import javax.ws.rs.client.RESTClient;
public class S {
    private EntityManager em;
    public void m() {
        em.createQuery("q");
        new RESTClient("http://x");
        new java.net.Socket();
    }
})");
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    std::vector<InteractionSite> sites =
        detect_interaction_sites(model, PatternCatalog::defaults());
    REQUIRE(sites.size() == 3);

    std::map<std::string, SiteKind> by_pattern;
    for (const auto& s : sites) by_pattern[s.matched_pattern] = s.kind;
    CHECK(by_pattern.at("EntityManager") == SiteKind::db_access);
    CHECK(by_pattern.at("RESTClient") == SiteKind::service_call);
    CHECK(by_pattern.at("Socket") == SiteKind::external);

    // Site evidence contains the matched catalog name.
    auto text = read_file(dir.str() + "/w/S.java");
    for (const auto& s : sites) {
        CHECK(slice_span(*text, s.evidence).find(s.matched_pattern) != std::string::npos);
    }

    PatternCatalog empty;
    CHECK_THROWS_AS(detect_interaction_sites(model, empty), Error);
}

TEST_CASE("sync constructs cover methods and blocks") {
    testutil::TempDir dir("sync");
    write_file(dir.str() + "/w/L.java", R"(package w;
public class L {
    private Object lock;
    private boolean flag;
    public synchronized void set(boolean v) { this.flag = v; }
    public void block() {
        synchronized (lock) { flag = true; }
    }
    public void clean() {}
})");
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    std::vector<SyncConstruct> sync = detect_sync_constructs(model);
    REQUIRE(sync.size() == 2);
    std::map<std::string, SyncForm> by_owner;
    for (const auto& s : sync) by_owner[s.owner_method_id] = s.form;
    CHECK(by_owner.at("method:w.L#set(boolean)") == SyncForm::synchronized_method);
    CHECK(by_owner.at("method:w.L#block()") == SyncForm::synchronized_block);
}

TEST_CASE("flow metrics aggregate per method") {
    std::string src = R"(package w;
public class F {
    public void m(int n) {
        if (n > 0) { one(); }
        if (n > 1) { two(); }
        for (int i = 0; i < n; i++) {
            for (int j = 0; j < n; j++) {
                three();
            }
        }
    }
    public void empty() {}
    public void dup() { same(); same(); }
    void one() {} void two() {} void three() {} void same() {}
})";
    testutil::TempDir dir("fm");
    write_file(dir.str() + "/w/F.java", src);
    CodeModel model = parse_repository(dir.str(), RepoConfig{});
    auto metrics = compute_flow_metrics(model);

    const FlowMetrics& m = metrics.at("method:w.F#m(int)");
    CHECK(m.branch_count == 2);
    CHECK(m.loop_count == 2);
    CHECK(m.max_loop_depth == 2);
    CHECK(m.call_fan_out == 3);

    const FlowMetrics& empty = metrics.at("method:w.F#empty()");
    CHECK(empty.branch_count == 0);
    CHECK(empty.loop_count == 0);
    CHECK(empty.max_loop_depth == 0);
    CHECK(empty.call_fan_out == 0);

    CHECK(metrics.at("method:w.F#dup()").call_fan_out == 1);
}

TEST_CASE("monotonicity: adding a file never removes nodes, sites or sync") {
    testutil::TempDir dir("mono");
    write_file(dir.str() + "/w/A.java", R"(package w;
import javax.servlet.http.HttpServlet;
import javax.persistence.EntityManager;
public class A extends HttpServlet {
    private EntityManager em;
    public synchronized void doGet(Req q) { em.find(q); }
})");
    CodeModel before = parse_repository(dir.str(), RepoConfig{});
    PatternCatalog catalog = PatternCatalog::defaults();
    BehaviorModel bm_before =
        build_behavior_model(before, detect_endpoints(before, catalog), catalog);

    write_file(dir.str() + "/w/B.java", R"(package w;
public class B {
    public void extra() {}
})");
    CodeModel after = parse_repository(dir.str(), RepoConfig{});
    BehaviorModel bm_after =
        build_behavior_model(after, detect_endpoints(after, catalog), catalog);

    std::set<std::string> nodes_before(bm_before.call_graph.nodes.begin(),
                                       bm_before.call_graph.nodes.end());
    std::set<std::string> nodes_after(bm_after.call_graph.nodes.begin(),
                                      bm_after.call_graph.nodes.end());
    for (const auto& n : nodes_before) CHECK(nodes_after.count(n) == 1);
    CHECK(bm_after.sites.size() >= bm_before.sites.size());
    CHECK(bm_after.sync.size() >= bm_before.sync.size());
}
