#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include "helpers.hpp"
#include "sysopt/error.hpp"
#include "sysopt/parser.hpp"
#include "sysopt/span.hpp"

using namespace sysopt;

namespace {

// Independent token-walk oracle for the minimal one-class example: strips
// comments/strings with a character scan, then counts whole-word hits.
int count_word(const std::string& text, const std::string& word) {
    int n = 0;
    size_t pos = 0;
    auto is_ident = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    };
    while ((pos = text.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_ident(text[pos - 1]);
        bool right_ok = pos + word.size() >= text.size() || !is_ident(text[pos + word.size()]);
        if (left_ok && right_ok) ++n;
        pos += word.size();
    }
    return n;
}

}  // namespace

TEST_CASE("parse_unit matches the token-walk oracle on the minimal class") {
    std::string src = "package a; public class C { public void m(){ new Object(); } }";
    std::string scrubbed = testutil::strip_comments_and_strings(src);

    // Oracle: one class keyword, one void method, one `new Object`.
    CHECK(count_word(scrubbed, "class") == 1);
    CHECK(count_word(scrubbed, "new") == 1);
    CHECK(count_word(scrubbed, "Object") == 1);

    ParsedUnit parsed = parse_unit(src, "a/C.java");
    REQUIRE(parsed.unit.types.size() == 1);
    const TypeDecl& c = parsed.unit.types[0];
    CHECK(c.qualified_name == "a.C");
    CHECK(c.kind == TypeKind::class_k);
    REQUIRE(c.methods.size() == 1);
    const MethodDecl& m = c.methods[0];
    CHECK(m.signature_key == "a.C#m()");
    REQUIRE(m.facts.allocations.size() == 1);
    CHECK(m.facts.allocations[0].constructed_type == "Object");
    CHECK(m.facts.allocations[0].loop_depth == 0);
}

TEST_CASE("empty file yields an empty unit") {
    ParsedUnit parsed = parse_unit("", "Empty.java");
    CHECK(parsed.unit.package_name.empty());
    CHECK(parsed.unit.types.empty());
}

TEST_CASE("comments and strings never contribute facts") {
    std::string src = R"(package a;
public class C {
    public void m() {
        // new Client("http://x")
        /* synchronized (lock) { new ObjectMapper(); } */
        String s = "new Gson() while(true) em.createQuery";
        char c = '{';
        use(s, c);
    }
})";
    ParsedUnit parsed = parse_unit(src, "a/C.java");
    const MethodDecl& m = parsed.unit.types.at(0).methods.at(0);
    CHECK(m.facts.allocations.empty());
    CHECK(m.facts.sync_blocks.empty());
    CHECK(m.facts.loop_count == 0);
    REQUIRE(m.facts.calls.size() == 1);
    CHECK(m.facts.calls[0].callee == "use");
    CHECK(m.facts.calls[0].arg_count == 2);
}

TEST_CASE("comment/string immunity: injecting trigger text changes no facts") {
    std::string base = R"(package a;
public class C {
    private EntityManager em;
    public void m() {
        em.createQuery("q");
        for (int i = 0; i < 3; i++) { ping(i); }
    }
})";
    ParsedUnit before = parse_unit(base, "a/C.java");

    // String-literal payloads must stay quote-free to keep the literal closed.
    const std::vector<std::string> comment_payloads = {
        "new Client(\"http://evil\")", "synchronized(this){}", "while(true){}",
        "new ObjectMapper()", "if(x) em.createQuery(\"z\")",
    };
    const std::vector<std::string> string_payloads = {
        "new Client(url)", "synchronized(this){}", "while(true){}",
        "new ObjectMapper()", "if(x) em.createQuery(z)",
    };
    std::mt19937 rng(42);
    for (int round = 0; round < 32; ++round) {
        std::string injected = base;
        if (rng() % 2 == 0) {
            const std::string& payload = comment_payloads[rng() % comment_payloads.size()];
            size_t at = injected.find("ping(i);");
            injected.insert(at, "// " + payload + "\n        ");
        } else {
            const std::string& payload = string_payloads[rng() % string_payloads.size()];
            size_t at = injected.find("\"q\"");
            injected.insert(at + 2, " " + payload);
        }
        ParsedUnit after = parse_unit(injected, "a/C.java");
        const MethodFacts& fa = after.unit.types.at(0).methods.at(0).facts;
        const MethodFacts& fb = before.unit.types.at(0).methods.at(0).facts;
        CHECK(fa.calls.size() == fb.calls.size());
        CHECK(fa.allocations.size() == fb.allocations.size());
        CHECK(fa.sync_blocks.size() == fb.sync_blocks.size());
        CHECK(fa.loop_count == fb.loop_count);
        CHECK(fa.branch_count == fb.branch_count);
    }
}

TEST_CASE("loop depth matches the bracket-matching oracle") {
    // Oracle restriction: loops in this fixture always use braces, so a
    // brace-stack walk over the scrubbed text can recover nesting depth.
    std::string src = R"(package a;
public class C {
    public void m() {
        new A0();
        for (int i = 0; i < 3; i++) {
            new A1();
            while (cond()) {
                new A2();
                do {
                    new A3();
                } while (next());
            }
            new A1b();
        }
        new A0b();
    }
})";
    std::string scrubbed = testutil::strip_comments_and_strings(src);

    // Independent oracle: walk characters, tracking a stack of '{' frames
    // tagged as loop bodies when preceded by for/while/do headers.
    std::vector<std::pair<std::string, int>> oracle;
    {
        std::vector<bool> loop_frame;
        int paren_depth = 0;
        std::string pending;  // significant text since last statement boundary
        for (size_t i = 0; i < scrubbed.size(); ++i) {
            char ch = scrubbed[i];
            if (ch == '(') ++paren_depth;
            if (ch == ')') --paren_depth;
            if (ch == '{') {
                bool is_loop = pending.find("for") != std::string::npos ||
                               pending.find("while") != std::string::npos;
                std::string trimmed = pending;
                trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), ::isspace),
                              trimmed.end());
                if (trimmed.size() >= 2 && trimmed.substr(trimmed.size() - 2) == "do") {
                    is_loop = true;
                }
                loop_frame.push_back(is_loop);
                pending.clear();
                continue;
            }
            if (ch == '}') {
                if (!loop_frame.empty()) loop_frame.pop_back();
                pending.clear();
                continue;
            }
            if (ch == ';' && paren_depth == 0) {
                pending.clear();
                continue;
            }
            pending += ch;
            if (pending.size() >= 4 && pending.substr(pending.size() - 4) == "new ") {
                // Scan the allocation type name.
                size_t j = i + 1;
                std::string name;
                while (j < scrubbed.size() &&
                       (std::isalnum(static_cast<unsigned char>(scrubbed[j])) ||
                        scrubbed[j] == '_')) {
                    name += scrubbed[j++];
                }
                int depth = static_cast<int>(
                    std::count(loop_frame.begin(), loop_frame.end(), true));
                oracle.emplace_back(name, depth);
            }
        }
    }
    REQUIRE(oracle.size() == 6);

    ParsedUnit parsed = parse_unit(src, "a/C.java");
    const auto& allocations = parsed.unit.types.at(0).methods.at(0).facts.allocations;
    REQUIRE(allocations.size() == oracle.size());
    for (size_t i = 0; i < oracle.size(); ++i) {
        CHECK(allocations[i].constructed_type == oracle[i].first);
        CHECK(allocations[i].loop_depth == oracle[i].second);
    }
}

TEST_CASE("single-statement loops still nest correctly") {
    std::string src = R"(package a;
public class C {
    public void m() {
        for (int i = 0; i < 2; i++)
            for (int j = 0; j < 2; j++)
                hit(i, j);
        after();
    }
})";
    ParsedUnit parsed = parse_unit(src, "a/C.java");
    const auto& calls = parsed.unit.types.at(0).methods.at(0).facts.calls;
    REQUIRE(calls.size() == 2);
    CHECK(calls[0].callee == "hit");
    CHECK(calls[0].loop_depth == 2);
    CHECK(calls[1].callee == "after");
    CHECK(calls[1].loop_depth == 0);
    CHECK(parsed.unit.types.at(0).methods.at(0).facts.max_loop_depth == 2);
}

TEST_CASE("span soundness: fact spans contain their defining token") {
    std::string src = R"(package a;
public class C {
    private Object lock;
    public synchronized void locked() { flagOnly(); }
    public void m() {
        Object o = new Object();
        synchronized (lock) {
            o.toString();
        }
    }
})";
    ParsedUnit parsed = parse_unit(src, "a/C.java");
    const TypeDecl& c = parsed.unit.types.at(0);

    const MethodDecl& locked = c.methods.at(0);
    CHECK(slice_span(src, locked.span).find("synchronized") != std::string::npos);

    const MethodDecl& m = c.methods.at(1);
    REQUIRE(m.facts.allocations.size() == 1);
    CHECK(slice_span(src, m.facts.allocations[0].span).find("new") != std::string::npos);
    REQUIRE(m.facts.sync_blocks.size() == 1);
    CHECK(slice_span(src, m.facts.sync_blocks[0]).find("synchronized") != std::string::npos);
}

TEST_CASE("determinism: same bytes parse to structurally identical units") {
    auto path = testutil::fixture("rules-corpus/app/src/main/java/rc/Dao.java");
    auto text = read_file(path);
    REQUIRE(text.has_value());
    ParsedUnit a = parse_unit(*text, "Dao.java");
    ParsedUnit b = parse_unit(*text, "Dao.java");
    REQUIRE(a.unit.types.size() == b.unit.types.size());
    const auto& ma = a.unit.types[0].methods;
    const auto& mb = b.unit.types[0].methods;
    REQUIRE(ma.size() == mb.size());
    for (size_t i = 0; i < ma.size(); ++i) {
        CHECK(ma[i].signature_key == mb[i].signature_key);
        CHECK(ma[i].facts.calls.size() == mb[i].facts.calls.size());
        CHECK(ma[i].span == mb[i].span);
    }
}

TEST_CASE("receiver hints resolve through fields, locals, params and statics") {
    std::string src = R"(package a;
import javax.persistence.EntityManager;
public class C {
    private EntityManager em;
    public void m(Helper h) {
        Widget w = makeWidget();
        em.createQuery("q");
        h.assist();
        w.render();
        Registry.lookup("x");
        this.own();
        chain().deep();
    }
    private void own() {}
    private Widget makeWidget() { return null; }
})";
    ParsedUnit parsed = parse_unit(src, "a/C.java");
    const auto& calls = parsed.unit.types.at(0).methods.at(0).facts.calls;
    auto hint_of = [&](const std::string& callee) -> std::string {
        for (const auto& c : calls) {
            if (c.callee == callee) return c.receiver_hint;
        }
        return "<missing>";
    };
    CHECK(hint_of("createQuery") == "EntityManager");
    CHECK(hint_of("assist") == "Helper");
    CHECK(hint_of("render") == "Widget");
    CHECK(hint_of("lookup") == "Registry");
    CHECK(hint_of("own") == "C");
    CHECK(hint_of("chain") == "C");
    CHECK(hint_of("deep").empty());
}

TEST_CASE("anonymous classes are opaque and diagnosed") {
    std::string src = R"(package a;
public class C {
    public void m() {
        Runnable r = new Runnable() {
            public void run() { new ObjectMapper(); }
        };
        r.run();
    }
})";
    ParsedUnit parsed = parse_unit(src, "a/C.java");
    const auto& facts = parsed.unit.types.at(0).methods.at(0).facts;
    REQUIRE(facts.allocations.size() == 1);  // only the Runnable allocation itself
    CHECK(facts.allocations[0].constructed_type == "Runnable");
    bool diagnosed = false;
    for (const auto& d : parsed.diagnostics) {
        if (d.code == "anon-class-skipped") diagnosed = true;
    }
    CHECK(diagnosed);
}

TEST_CASE("nested types carry enclosing names; fields record modifiers") {
    std::string src = R"(package a;
public class Outer {
    public static final int LIMIT = 10;
    private volatile boolean ready;
    static class Inner {
        void tick() {}
    }
})";
    ParsedUnit parsed = parse_unit(src, "a/Outer.java");
    REQUIRE(parsed.unit.types.size() == 2);
    CHECK(parsed.unit.types[0].qualified_name == "a.Outer");
    CHECK(parsed.unit.types[1].qualified_name == "a.Outer.Inner");

    const auto& fields = parsed.unit.types[0].fields;
    REQUIRE(fields.size() == 2);
    CHECK(fields[0].is_static);
    CHECK(fields[0].is_final);
    CHECK(fields[0].initializer_kind == InitializerKind::other);
    CHECK(fields[1].is_volatile);
    CHECK_FALSE(fields[1].is_final);
    CHECK(fields[1].initializer_kind == InitializerKind::none);
}

TEST_CASE("unknown constructs are skipped with diagnostics, never aborting") {
    std::string src = R"(package a;
@interface Marker { int value(); }
public class C {
    public void ok() {}
})";
    ParsedUnit parsed = parse_unit(src, "a/C.java");
    REQUIRE(parsed.unit.types.size() >= 1);
    bool found_c = false;
    for (const auto& t : parsed.unit.types) {
        if (t.name == "C") found_c = true;
    }
    CHECK(found_c);
    bool skipped = false;
    for (const auto& d : parsed.diagnostics) {
        if (d.code == "construct-skipped") skipped = true;
    }
    CHECK(skipped);
}

TEST_CASE("invalid UTF-8 raises UnreadableSource") {
    std::string bad = "package a;\xFF\xFE class C {}";
    CHECK_THROWS_AS(parse_unit(bad, "Bad.java"), Error);
    try {
        parse_unit(bad, "Bad.java");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unreadable_source);
    }
}

TEST_CASE("parse_repository: glob filtering, ordering and NoSourcesFound") {
    testutil::TempDir dir("repo");
    write_file(dir.str() + "/b/Second.java", "package b; class Second {}");
    write_file(dir.str() + "/a/First.java", "package a; class First {}");
    write_file(dir.str() + "/a/skip/Excluded.java", "package a.skip; class Excluded {}");
    write_file(dir.str() + "/notes.txt", "not java");

    RepoConfig config;
    config.exclude_globs = {"a/skip/**"};
    CodeModel model = parse_repository(dir.str(), config);
    REQUIRE(model.units.size() == 2);
    CHECK(model.units[0].span.path == "a/First.java");  // lexicographic order
    CHECK(model.units[1].span.path == "b/Second.java");

    RepoConfig nothing;
    nothing.source_globs = {"**/*.scala"};
    CHECK_THROWS_AS(parse_repository(dir.str(), nothing), Error);
}

TEST_CASE("fingerprint changes when any parsed byte changes") {
    testutil::TempDir dir("fp");
    write_file(dir.str() + "/A.java", "package p; class A { void m() {} }");
    RepoConfig config;
    CodeModel one = parse_repository(dir.str(), config);
    write_file(dir.str() + "/A.java", "package p; class A { void n() {} }");
    CodeModel two = parse_repository(dir.str(), config);
    CHECK(one.fingerprint != two.fingerprint);
}

TEST_CASE("endpoint annotation arguments capture string literals") {
    std::string src = R"(package a;
import javax.ws.rs.GET;
import javax.ws.rs.Path;
@Path("/items")
public class Items {
    @GET
    @Path("/list")
    public String list() { return ""; }
})";
    ParsedUnit parsed = parse_unit(src, "a/Items.java");
    const TypeDecl& t = parsed.unit.types.at(0);
    REQUIRE(t.annotations.size() == 1);
    CHECK(t.annotations[0].name == "Path");
    REQUIRE(t.annotations[0].string_arguments.size() == 1);
    CHECK(t.annotations[0].string_arguments[0] == "/items");
    REQUIRE(t.methods.at(0).annotations.size() == 2);
}
