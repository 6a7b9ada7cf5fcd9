#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sysopt {

std::optional<std::string> read_file(const std::string& path);

// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

void write_file(const std::string& path, const std::string& content);

// All regular files under `root`, as repo-relative paths with forward
// slashes, sorted lexicographically.
std::vector<std::string> list_files_recursive(const std::string& root);

bool is_valid_utf8(const std::string& bytes);

// Forward slashes, no trailing slash, "." and ".." segments resolved.
std::string normalize_rel_path(const std::string& path);

std::string join_path(const std::string& a, const std::string& b);

}  // namespace sysopt
