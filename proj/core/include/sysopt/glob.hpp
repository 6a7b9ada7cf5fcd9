#pragma once

#include <string>
#include <vector>

namespace sysopt {

// Matches '/'-separated relative paths against glob patterns.
//   *   any run of characters except '/'
//   ?   any single character except '/'
//   **  any run of characters including '/'
bool glob_match(const std::string& pattern, const std::string& path);

bool matches_any(const std::vector<std::string>& patterns, const std::string& path);

}  // namespace sysopt
