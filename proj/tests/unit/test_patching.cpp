#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "sysopt/analysis.hpp"
#include "sysopt/diff.hpp"
#include "sysopt/error.hpp"
#include "sysopt/parser.hpp"
#include "sysopt/patching.hpp"
#include "sysopt/pipeline.hpp"

using namespace sysopt;

namespace {

struct Workbench {
    testutil::TempDir dir;
    PipelineConfig config;
    SummaryArtifacts art;
    RuleCatalog rules;
    std::vector<Finding> findings;

    explicit Workbench(const std::string& fixture_name)
        : dir("patch"), config{}, art{}, rules{} {
        testutil::copy_tree(testutil::fixture(fixture_name), dir.str());
        config.repo_root = dir.str();
        refresh();
    }

    void refresh() {
        art = build_summary_artifacts(config);
        rules = RuleCatalog::defaults(art.patterns);
        findings =
            rank_findings(detect_findings(art.summary, rules, art.patterns, art.model));
    }

    const Finding& finding(const std::string& rule, const std::string& path_fragment) {
        for (const Finding& f : findings) {
            if (f.rule_id == rule &&
                f.evidence.front().path.find(path_fragment) != std::string::npos) {
                return f;
            }
        }
        FAIL("no ", rule, " finding for ", path_fragment);
        static Finding dummy;
        return dummy;
    }

    int count_findings(const std::string& rule, const std::string& class_id) {
        int n = 0;
        for (const Finding& f : findings) {
            if (f.rule_id == rule && f.owner_class_id == class_id) ++n;
        }
        return n;
    }
};

}  // namespace

TEST_CASE("R3 patch hoists the serializer, rewrites both sites and converges") {
    Workbench wb("teastore-mini");
    const Finding& f = wb.finding("R3", "AbstractUIServlet");
    Patch patch = generate_patch(f, wb.art.model);
    CHECK(patch.target_path == "webui/src/main/java/shop/webui/AbstractUIServlet.java");
    CHECK(patch.diff.find("SHARED_OBJECTMAPPER") != std::string::npos);

    // The diff applies cleanly to the pristine file.
    std::string pristine = wb.art.model.sources.at(patch.target_path);
    ApplyResultText applied = apply_unified_diff(patch.diff, pristine);
    REQUIRE(applied.ok);
    CHECK(applied.new_text.find("private static final ObjectMapper SHARED_OBJECTMAPPER = "
                                "new ObjectMapper();") != std::string::npos);
    // Both call-site allocations were replaced.
    size_t sites = 0, pos = 0;
    while ((pos = applied.new_text.find("new ObjectMapper()", pos)) != std::string::npos) {
        ++sites;
        pos += 1;
    }
    CHECK(sites == 1);  // only the shared-field initializer remains

    // Apply + re-analyze oracle: zero R3 findings remain in that class.
    write_file(wb.dir.str() + "/" + patch.target_path, applied.new_text);
    wb.refresh();
    CHECK(wb.count_findings("R3", "class:shop.webui.AbstractUIServlet") == 0);

    // Re-applying the same diff is a clean conflict.
    ApplyResultText again = apply_unified_diff(patch.diff, applied.new_text);
    CHECK_FALSE(again.ok);
}

TEST_CASE("R1 patch introduces SHARED_CLIENT and converges") {
    Workbench wb("teastore-mini");
    const Finding& f = wb.finding("R1", "RESTClient");
    Patch patch = generate_patch(f, wb.art.model);
    CHECK(patch.diff.find("SHARED_CLIENT") != std::string::npos);

    std::string pristine = wb.art.model.sources.at(patch.target_path);
    ApplyResultText applied = apply_unified_diff(patch.diff, pristine);
    REQUIRE(applied.ok);
    CHECK(applied.new_text.find("private static final Client SHARED_CLIENT = new Client(") !=
          std::string::npos);
    CHECK(applied.new_text.find("this.client = SHARED_CLIENT;") != std::string::npos);

    write_file(wb.dir.str() + "/" + patch.target_path, applied.new_text);
    wb.refresh();
    CHECK(wb.count_findings("R1", "class:shop.registry.RESTClient") == 0);
}

TEST_CASE("R1 protocol pair produces _HTTP and _HTTPS fields") {
    testutil::TempDir dir("proto");
    write_file(dir.str() + "/app/pom.xml", "<project/>");
    write_file(dir.str() + "/app/src/rc/Dual.java", R"(package rc;

import javax.ws.rs.client.Client;
import javax.servlet.http.HttpServlet;

public class Dual extends HttpServlet {
    private Client plain;
    private Client secure;

    public void doGet(Req q) {
        plain = new Client("http://svc:80");
        secure = new Client("https://svc:443");
    }
})");
    PipelineConfig config;
    config.repo_root = dir.str();
    SummaryArtifacts art = build_summary_artifacts(config);
    RuleCatalog rules = RuleCatalog::defaults(art.patterns);
    auto findings = rank_findings(detect_findings(art.summary, rules, art.patterns, art.model));
    REQUIRE_FALSE(findings.empty());

    Patch patch = generate_patch(findings.front(), art.model);
    CHECK(patch.diff.find("SHARED_CLIENT_HTTP ") != std::string::npos);
    CHECK(patch.diff.find("SHARED_CLIENT_HTTPS ") != std::string::npos);

    std::string pristine = art.model.sources.at(patch.target_path);
    ApplyResultText applied = apply_unified_diff(patch.diff, pristine);
    REQUIRE(applied.ok);
    CHECK(applied.new_text.find("plain = SHARED_CLIENT_HTTP;") != std::string::npos);
    CHECK(applied.new_text.find("secure = SHARED_CLIENT_HTTPS;") != std::string::npos);
}

TEST_CASE("R1 with per-call constructor arguments is NotApplicable") {
    testutil::TempDir dir("dyn");
    write_file(dir.str() + "/app/pom.xml", "<project/>");
    write_file(dir.str() + "/app/src/rc/Dyn.java", R"(package rc;

import javax.ws.rs.client.Client;
import javax.servlet.http.HttpServlet;

public class Dyn extends HttpServlet {
    public void doGet(Req q) {
        Client c = new Client(q.url());
        c.go();
    }
})");
    PipelineConfig config;
    config.repo_root = dir.str();
    SummaryArtifacts art = build_summary_artifacts(config);
    RuleCatalog rules = RuleCatalog::defaults(art.patterns);
    auto findings = rank_findings(detect_findings(art.summary, rules, art.patterns, art.model));
    REQUIRE_FALSE(findings.empty());
    CHECK_THROWS_AS(generate_patch(findings.front(), art.model), Error);
}

TEST_CASE("R2 patch removes synchronized and adds volatile; body predicate is conservative") {
    Workbench wb("teastore-mini");
    const Finding& f = wb.finding("R2", "CacheManager");
    Patch patch = generate_patch(f, wb.art.model);

    std::string pristine = wb.art.model.sources.at(patch.target_path);
    ApplyResultText applied = apply_unified_diff(patch.diff, pristine);
    REQUIRE(applied.ok);
    CHECK(applied.new_text.find("synchronized") == std::string::npos);
    CHECK(applied.new_text.find("private volatile boolean maintenanceMode;") !=
          std::string::npos);

    write_file(wb.dir.str() + "/" + patch.target_path, applied.new_text);
    wb.refresh();
    CHECK(wb.count_findings("R2", "class:shop.persistence.CacheManager") == 0);
}

TEST_CASE("R2 refuses methods whose bodies do more than flag updates") {
    Workbench wb("rules-corpus");
    // Gateway.send is synchronized but calls other methods.
    const Finding& f = wb.finding("R2", "Gateway");
    CHECK_THROWS_AS(generate_patch(f, wb.art.model), Error);
    try {
        generate_patch(f, wb.art.model);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::not_applicable);
    }

    // Synchronized blocks have no deterministic transformation either.
    const Finding& block = wb.finding("R2", "Dao");
    CHECK_THROWS_AS(generate_patch(block, wb.art.model), Error);
}

TEST_CASE("R2 rejects read-modify-write flag bodies") {
    testutil::TempDir dir("rmw");
    write_file(dir.str() + "/app/pom.xml", "<project/>");
    write_file(dir.str() + "/app/src/rc/Toggle.java", R"(package rc;

import javax.servlet.http.HttpServlet;

public class Toggle extends HttpServlet {
    private boolean on;

    public void doGet(Req q) { flip(); }

    public synchronized void flip() {
        this.on = !on;
    }
})");
    PipelineConfig config;
    config.repo_root = dir.str();
    SummaryArtifacts art = build_summary_artifacts(config);
    RuleCatalog rules = RuleCatalog::defaults(art.patterns);
    auto findings = rank_findings(detect_findings(art.summary, rules, art.patterns, art.model));
    REQUIRE_FALSE(findings.empty());
    CHECK_THROWS_AS(generate_patch(findings.front(), art.model), Error);
}

TEST_CASE("StaleEvidence when the file changed after analysis") {
    Workbench wb("teastore-mini");
    const Finding& f = wb.finding("R3", "AbstractUIServlet");
    std::string path = wb.dir.str() + "/" + f.evidence.front().path;
    auto original = read_file(path);
    REQUIRE(original.has_value());
    write_file(path, *original + "\n// drift\n");

    CHECK_THROWS_AS(generate_patch(f, wb.art.model, wb.dir.str()), Error);
    try {
        generate_patch(f, wb.art.model, wb.dir.str());
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::stale_evidence);
    }
}

TEST_CASE("verify_non_breaking detects public surface changes") {
    testutil::TempDir dir("nb");
    write_file(dir.str() + "/w/Api.java", R"(package w;
import javax.servlet.http.HttpServlet;
public class Api extends HttpServlet {
    public int limit;
    public void doGet(Req q) {}
    public String name() { return ""; }
})");
    CodeModel before = parse_repository(dir.str(), RepoConfig{});
    PatternCatalog catalog = PatternCatalog::defaults();

    SUBCASE("identical models pass") {
        CHECK(verify_non_breaking(before, before, catalog).ok);
    }

    SUBCASE("renaming a public method breaks the signature multiset") {
        std::string changed = R"(package w;
import javax.servlet.http.HttpServlet;
public class Api extends HttpServlet {
    public int limit;
    public void doGet(Req q) {}
    public String renamed() { return ""; }
})";
        CodeModel after = reparse_file(before, "w/Api.java", changed);
        NonBreakingVerdict verdict = verify_non_breaking(before, after, catalog);
        CHECK_FALSE(verdict.ok);
        CHECK(verdict.reason.find("signature") != std::string::npos);
    }

    SUBCASE("dropping an endpoint method breaks the endpoint set") {
        std::string changed = R"(package w;
import javax.servlet.http.HttpServlet;
public class Api extends HttpServlet {
    public int limit;
    protected void doGet(Req q) {}
    public String name() { return ""; }
    public void doGetX(Req q) {}
})";
        CodeModel after = reparse_file(before, "w/Api.java", changed);
        NonBreakingVerdict verdict = verify_non_breaking(before, after, catalog);
        CHECK_FALSE(verdict.ok);
    }

    SUBCASE("retyping a public field is breaking") {
        std::string changed = R"(package w;
import javax.servlet.http.HttpServlet;
public class Api extends HttpServlet {
    public long limit;
    public void doGet(Req q) {}
    public String name() { return ""; }
})";
        CodeModel after = reparse_file(before, "w/Api.java", changed);
        NonBreakingVerdict verdict = verify_non_breaking(before, after, catalog);
        CHECK_FALSE(verdict.ok);
        CHECK(verdict.reason.find("field") != std::string::npos);
    }

    SUBCASE("adding a private member passes") {
        std::string changed = R"(package w;
import javax.servlet.http.HttpServlet;
public class Api extends HttpServlet {
    private static final int CACHE = 1;
    public int limit;
    public void doGet(Req q) {}
    public String name() { return ""; }
})";
        CodeModel after = reparse_file(before, "w/Api.java", changed);
        CHECK(verify_non_breaking(before, after, catalog).ok);
    }
}

TEST_CASE("apply_patchset: order, conflicts, fingerprint gate and parse failures") {
    Workbench wb("teastore-mini");
    PatternCatalog catalog = wb.art.patterns;

    SUBCASE("all compatible patches apply and the workspace re-parses") {
        GeneratedPatches generated =
            generate_patchset(wb.findings, wb.art.model, 1, wb.dir.str());
        REQUIRE(generated.set.patches.size() >= 3);
        ApplyOutcome outcome =
            apply_patchset(generated.set, wb.dir.str(), wb.art.model, catalog);
        CHECK(outcome.rejected.empty());
        CHECK(outcome.applied.size() == generated.set.patches.size());

        wb.refresh();
        CHECK(wb.findings.empty());  // full convergence
    }

    SUBCASE("overlapping hunks: first applies, second conflicts") {
        const Finding& f = wb.finding("R3", "AbstractUIServlet");
        Patch patch = generate_patch(f, wb.art.model);
        PatchSet set;
        set.base_fingerprint = wb.art.model.fingerprint;
        set.patches = {patch, patch};  // same edit twice
        ApplyOutcome outcome = apply_patchset(set, wb.dir.str(), wb.art.model, catalog);
        CHECK(outcome.applied.size() == 1);
        REQUIRE(outcome.rejected.size() == 1);
        CHECK(outcome.rejected[0].status == PatchStatus::rejected_conflict);
    }

    SUBCASE("empty set is a no-op") {
        PatchSet set;
        set.base_fingerprint = wb.art.model.fingerprint;
        ApplyOutcome outcome = apply_patchset(set, wb.dir.str(), wb.art.model, catalog);
        CHECK(outcome.applied.empty());
        CHECK(outcome.rejected.empty());
    }

    SUBCASE("fingerprint mismatch refuses to touch the workspace") {
        PatchSet set;
        set.base_fingerprint = "0000000000000000";
        CHECK_THROWS_AS(apply_patchset(set, wb.dir.str(), wb.art.model, catalog), Error);
    }

    SUBCASE("a patch that breaks the public API is rejected_breaking") {
        std::string target = "registry/src/main/java/shop/registry/RESTClient.java";
        std::string pristine = wb.art.model.sources.at(target);
        std::string broken = pristine;
        size_t at = broken.find("public String get(");
        REQUIRE(at != std::string::npos);
        broken.replace(at, std::string("public String get(").size(),
                       "public String getRenamed(");
        Patch patch;
        patch.finding_id = "manual";
        patch.rule_id = "R1";
        patch.target_path = target;
        patch.diff = make_unified_diff(target, pristine, broken);

        PatchSet set;
        set.base_fingerprint = wb.art.model.fingerprint;
        set.patches = {patch};
        ApplyOutcome outcome = apply_patchset(set, wb.dir.str(), wb.art.model, catalog);
        REQUIRE(outcome.rejected.size() == 1);
        CHECK(outcome.rejected[0].status == PatchStatus::rejected_breaking);
        // Workspace untouched.
        CHECK(*read_file(wb.dir.str() + "/" + target) == pristine);
    }

    SUBCASE("a patch that makes the file unparseable is rejected") {
        std::string target = "persistence/src/main/java/shop/persistence/CacheManager.java";
        std::string pristine = wb.art.model.sources.at(target);
        std::string mangled = pristine;
        size_t brace = mangled.rfind('}');
        REQUIRE(brace != std::string::npos);
        mangled.erase(brace, 1);  // drop the class's closing brace
        Patch patch;
        patch.finding_id = "manual";
        patch.rule_id = "R2";
        patch.target_path = target;
        patch.diff = make_unified_diff(target, pristine, mangled);

        PatchSet set;
        set.base_fingerprint = wb.art.model.fingerprint;
        set.patches = {patch};
        ApplyOutcome outcome = apply_patchset(set, wb.dir.str(), wb.art.model, catalog);
        REQUIRE(outcome.rejected.size() == 1);
        CHECK(outcome.rejected[0].status == PatchStatus::rejected_breaking);
        CHECK(outcome.rejected[0].status_reason.find("ParseFailureAfterPatch") !=
              std::string::npos);
    }
}

TEST_CASE("deterministic backend produces byte-identical diffs") {
    Workbench wb1("teastore-mini");
    GeneratedPatches g1 = generate_patchset(wb1.findings, wb1.art.model, 1);

    Workbench wb2("teastore-mini");
    GeneratedPatches g2 = generate_patchset(wb2.findings, wb2.art.model, 1);

    REQUIRE(g1.set.patches.size() == g2.set.patches.size());
    for (size_t i = 0; i < g1.set.patches.size(); ++i) {
        CHECK(g1.set.patches[i].diff == g2.set.patches[i].diff);
        CHECK(g1.set.patches[i].finding_id == g2.set.patches[i].finding_id);
    }
}

TEST_CASE("R4 findings have no deterministic transformation") {
    Workbench wb("rules-corpus");
    const Finding& f = wb.finding("R4", "LoopWorker");
    CHECK_THROWS_AS(generate_patch(f, wb.art.model), Error);
}
