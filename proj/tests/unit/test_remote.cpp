#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

#include "helpers.hpp"
#include "sysopt/analysis.hpp"
#include "sysopt/diff.hpp"
#include "sysopt/error.hpp"
#include "sysopt/json_io.hpp"
#include "sysopt/parser.hpp"
#include "sysopt/patching.hpp"
#include "sysopt/pipeline.hpp"

using namespace sysopt;

namespace {

// In-process stub backend for the remote-optimizer wire contract.
class StubServer {
public:
    explicit StubServer(std::function<std::string(const std::string&)> handler) {
        server_.Post("/optimize", [this, handler](const httplib::Request& req,
                                                  httplib::Response& res) {
            last_body_ = req.body;
            res.set_content(handler(req.body), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/optimize"; }
    const std::string& last_body() const { return last_body_; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::string last_body_;
};

struct RemoteBench {
    testutil::TempDir dir;
    PipelineConfig config;
    SummaryArtifacts art;
    AnalysisReport report;

    RemoteBench() : dir("remote") {
        testutil::copy_tree(testutil::fixture("teastore-mini"), dir.str());
        config.repo_root = dir.str();
        art = build_summary_artifacts(config);
        RuleCatalog rules = RuleCatalog::defaults(art.patterns);
        auto findings =
            rank_findings(detect_findings(art.summary, rules, art.patterns, art.model));
        report = build_report(findings, art.summary, art.diagnostics);
    }
};

}  // namespace

TEST_CASE("remote backend: valid diff accepted, breaking diff rejected") {
    RemoteBench bench;

    // A known-good diff for the R3 finding, plus a public-API-renaming one.
    const Finding* r3 = nullptr;
    for (const Finding& f : bench.report.findings) {
        if (f.rule_id == "R3") r3 = &f;
    }
    REQUIRE(r3 != nullptr);
    Patch good = generate_patch(*r3, bench.art.model);

    std::string target = "registry/src/main/java/shop/registry/RESTClient.java";
    std::string pristine = bench.art.model.sources.at(target);
    std::string renamed = pristine;
    size_t at = renamed.find("public String get(");
    REQUIRE(at != std::string::npos);
    renamed.replace(at, std::string("public String get(").size(), "public String fetch(");
    std::string breaking_diff = make_unified_diff(target, pristine, renamed);

    StubServer stub([&](const std::string&) {
        nlohmann::json res{{"patches",
                            {{{"finding_id", good.finding_id},
                              {"diff", good.diff},
                              {"justification", "reuse the serializer"}},
                             {{"finding_id", "remote:breaker"},
                              {"diff", breaking_diff},
                              {"justification", "rename for clarity"}}}}};
        return res.dump();
    });

    BackendSelector selector;
    selector.mode = BackendSelector::Mode::remote;
    selector.remote_url = stub.url();
    selector.timeout_s = 5;

    PatchSet set = request_remote_patches(bench.report, bench.art.summary, selector, 1);
    REQUIRE(set.patches.size() == 2);
    CHECK(set.patches[0].rule_id == "R3");  // matched back to the finding

    // The request body carried the summary and report.
    auto body = nlohmann::json::parse(stub.last_body());
    CHECK(body.at("schema_version") == kSchemaVersion);
    CHECK(body.contains("system_summary"));
    CHECK(body.contains("analysis_report"));

    ApplyOutcome outcome =
        apply_patchset(set, bench.dir.str(), bench.art.model, bench.art.patterns);
    REQUIRE(outcome.applied.size() == 1);
    CHECK(outcome.applied[0].finding_id == good.finding_id);
    REQUIRE(outcome.rejected.size() == 1);
    CHECK(outcome.rejected[0].status == PatchStatus::rejected_breaking);
}

TEST_CASE("malformed remote responses yield an empty set plus a diagnostic") {
    RemoteBench bench;
    BackendSelector selector;
    selector.mode = BackendSelector::Mode::remote;
    selector.timeout_s = 5;

    SUBCASE("non-JSON body") {
        StubServer stub([](const std::string&) { return "not json at all"; });
        selector.remote_url = stub.url();
        std::vector<Diagnostic> diags;
        PatchSet set =
            request_remote_patches(bench.report, bench.art.summary, selector, 1, &diags);
        CHECK(set.patches.empty());
        REQUIRE_FALSE(diags.empty());
        CHECK(diags[0].code == "remote-response");
    }

    SUBCASE("missing patches array") {
        StubServer stub([](const std::string&) { return "{\"ok\": true}"; });
        selector.remote_url = stub.url();
        std::vector<Diagnostic> diags;
        PatchSet set =
            request_remote_patches(bench.report, bench.art.summary, selector, 1, &diags);
        CHECK(set.patches.empty());
        CHECK_FALSE(diags.empty());
    }
}

TEST_CASE("unreachable remote raises RemoteTimeout") {
    RemoteBench bench;
    BackendSelector selector;
    selector.mode = BackendSelector::Mode::remote;
    selector.remote_url = "http://127.0.0.1:9/optimize";  // discard port, nothing listens
    selector.timeout_s = 0.5;

    try {
        request_remote_patches(bench.report, bench.art.summary, selector, 1);
        FAIL("expected RemoteTimeout");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::remote_timeout);
    }
}

TEST_CASE("non-200 responses raise RemoteProtocolError") {
    RemoteBench bench;
    httplib::Server server;
    server.Post("/optimize", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("boom", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    BackendSelector selector;
    selector.mode = BackendSelector::Mode::remote;
    selector.remote_url = "http://127.0.0.1:" + std::to_string(port) + "/optimize";
    selector.timeout_s = 5;

    try {
        request_remote_patches(bench.report, bench.art.summary, selector, 1);
        FAIL("expected RemoteProtocolError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::remote_protocol_error);
    }
    server.stop();
    t.join();
}
