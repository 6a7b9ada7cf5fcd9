#include "sysopt/glob.hpp"

namespace sysopt {

namespace {

bool match_from(const std::string& pat, size_t pi, const std::string& str, size_t si) {
    while (pi < pat.size()) {
        char pc = pat[pi];
        if (pc == '*') {
            bool double_star = pi + 1 < pat.size() && pat[pi + 1] == '*';
            if (double_star) {
                size_t next = pi + 2;
                // "**/" may also match the empty prefix.
                if (next < pat.size() && pat[next] == '/') {
                    if (match_from(pat, next + 1, str, si)) return true;
                }
                for (size_t k = si; k <= str.size(); ++k) {
                    if (match_from(pat, next, str, k)) return true;
                }
                return false;
            }
            for (size_t k = si; k <= str.size(); ++k) {
                if (match_from(pat, pi + 1, str, k)) return true;
                if (k < str.size() && str[k] == '/') break;
            }
            return false;
        }
        if (si >= str.size()) return false;
        if (pc == '?') {
            if (str[si] == '/') return false;
        } else if (pc != str[si]) {
            return false;
        }
        ++pi;
        ++si;
    }
    return si == str.size();
}

}  // namespace

bool glob_match(const std::string& pattern, const std::string& path) {
    return match_from(pattern, 0, path, 0);
}

bool matches_any(const std::vector<std::string>& patterns, const std::string& path) {
    for (const auto& p : patterns) {
        if (glob_match(p, path)) return true;
    }
    return false;
}

}  // namespace sysopt
