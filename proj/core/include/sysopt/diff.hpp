#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sysopt {

struct DiffHunk {
    int old_start = 0;  // 1-based; 0 when old_count == 0
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
    std::vector<std::string> lines;  // prefixed with ' ', '-' or '+'
};

struct FileDiff {
    std::string old_path;  // as written after "--- " (usually a/<path>)
    std::string new_path;
    std::vector<DiffHunk> hunks;
};

// Standard unified diff ("--- a/path", "+++ b/path", @@ hunks) with
// `context` lines of context. Returns an empty string when the texts match.
std::string make_unified_diff(const std::string& path, const std::string& old_text,
                              const std::string& new_text, int context = 3);

// Throws Error(ConfigError) on malformed input or when the diff touches
// more than one file.
FileDiff parse_unified_diff(const std::string& diff_text);

struct ApplyResultText {
    bool ok = false;
    std::string new_text;
    std::string conflict;  // human-readable reason when !ok
};

// Strict application: every context and deletion line must match the
// current text exactly at the stated (offset-adjusted) position.
ApplyResultText apply_unified_diff(const std::string& diff_text, const std::string& current_text);

// Repo-relative target of a diff ("a/x/y.java" -> "x/y.java").
std::string diff_target_path(const FileDiff& diff);

}  // namespace sysopt
