#include "sysopt/fingerprint.hpp"

#include <cstdio>

namespace sysopt {

uint64_t fnv1a64(std::string_view bytes, uint64_t seed) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
}

std::string fingerprint_sources(const std::vector<std::pair<std::string, std::string>>& files) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [path, content] : files) {
        h = fnv1a64(path, h);
        h = fnv1a64(std::string_view("\0", 1), h);
        h = fnv1a64(content, h);
        h = fnv1a64(std::string_view("\n", 1), h);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace sysopt
