#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sysopt {

uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);

// 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

// Content hash over (path, bytes) pairs; pairs are hashed in the order
// given, so callers pass them sorted by path for a stable result.
std::string fingerprint_sources(const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace sysopt
