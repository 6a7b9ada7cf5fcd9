#include <doctest.h>

#include "helpers.hpp"
#include "sysopt/diff.hpp"
#include "sysopt/fingerprint.hpp"
#include "sysopt/glob.hpp"
#include "sysopt/error.hpp"
#include "sysopt/span.hpp"

using namespace sysopt;

TEST_CASE("glob matching") {
    CHECK(glob_match("**/*.java", "a/b/C.java"));
    CHECK(glob_match("**/*.java", "C.java"));
    CHECK_FALSE(glob_match("*.java", "a/C.java"));
    CHECK(glob_match("a/*/c", "a/b/c"));
    CHECK_FALSE(glob_match("a/*/c", "a/b/d/c"));
    CHECK(glob_match("a/**/c", "a/b/d/c"));
    CHECK(glob_match("a/**", "a/b/d/c"));
    CHECK(glob_match("?.java", "C.java"));
    CHECK_FALSE(glob_match("?.java", "ab.java"));
}

TEST_CASE("slice_span cuts inclusive ranges") {
    std::string text = "alpha\nbravo charlie\ndelta\n";
    CHECK(slice_span(text, {"f", 2, 2, 1, 5}) == "bravo");
    CHECK(slice_span(text, {"f", 2, 2, 7, 13}) == "charlie");
    CHECK(slice_span(text, {"f", 1, 2, 1, 5}) == "alpha\nbravo");
}

TEST_CASE("fingerprint is order-stable and byte-sensitive") {
    std::vector<std::pair<std::string, std::string>> a{{"x", "1"}, {"y", "2"}};
    std::vector<std::pair<std::string, std::string>> b{{"x", "1"}, {"y", "2"}};
    CHECK(fingerprint_sources(a) == fingerprint_sources(b));
    b[1].second = "3";
    CHECK(fingerprint_sources(a) != fingerprint_sources(b));
}

TEST_CASE("unified diff round-trips through parse and apply") {
    std::string old_text = "one\ntwo\nthree\nfour\nfive\nsix\nseven\n";
    std::string new_text = "one\ntwo\nTHREE\nfour\nfive\nsix\nseven\nEIGHT\n";
    std::string diff = make_unified_diff("f.txt", old_text, new_text);
    REQUIRE_FALSE(diff.empty());
    CHECK(diff.find("--- a/f.txt") != std::string::npos);
    CHECK(diff.find("+++ b/f.txt") != std::string::npos);

    FileDiff parsed = parse_unified_diff(diff);
    CHECK(diff_target_path(parsed) == "f.txt");

    ApplyResultText applied = apply_unified_diff(diff, old_text);
    REQUIRE(applied.ok);
    CHECK(applied.new_text == new_text);
}

TEST_CASE("diff application is strict about context") {
    std::string old_text = "a\nb\nc\nd\n";
    std::string new_text = "a\nB\nc\nd\n";
    std::string diff = make_unified_diff("f.txt", old_text, new_text);

    ApplyResultText onto_changed = apply_unified_diff(diff, "a\nx\nc\nd\n");
    CHECK_FALSE(onto_changed.ok);
    CHECK_FALSE(onto_changed.conflict.empty());

    // Re-applying onto the already-patched text conflicts too.
    ApplyResultText twice = apply_unified_diff(diff, new_text);
    CHECK_FALSE(twice.ok);
}

TEST_CASE("diff handles multiple hunks and inserts") {
    std::string old_text;
    for (int i = 0; i < 40; ++i) old_text += "line" + std::to_string(i) + "\n";
    std::string new_text;
    for (int i = 0; i < 40; ++i) {
        if (i == 3) new_text += "inserted-top\n";
        if (i == 20) continue;  // deletion
        new_text += "line" + std::to_string(i) + "\n";
        if (i == 35) new_text += "inserted-bottom\n";
    }
    std::string diff = make_unified_diff("f.txt", old_text, new_text);
    ApplyResultText applied = apply_unified_diff(diff, old_text);
    REQUIRE(applied.ok);
    CHECK(applied.new_text == new_text);
    // Two separated edit regions produce at least two hunks.
    CHECK(parse_unified_diff(diff).hunks.size() >= 2);
}

TEST_CASE("diff refuses multi-file patches") {
    std::string two_files =
        "--- a/x.txt\n+++ b/x.txt\n@@ -1 +1 @@\n-a\n+b\n"
        "--- a/y.txt\n+++ b/y.txt\n@@ -1 +1 @@\n-c\n+d\n";
    CHECK_THROWS_AS(parse_unified_diff(two_files), Error);
}

TEST_CASE("diff of identical texts is empty") {
    CHECK(make_unified_diff("f", "same\n", "same\n").empty());
}
