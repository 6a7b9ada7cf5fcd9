#include "sysopt/diff.hpp"

#include <algorithm>
#include <sstream>

#include "sysopt/error.hpp"

namespace sysopt {

namespace {

constexpr const char* kNoNewline = "\\ No newline at end of file";

struct Lines {
    std::vector<std::string> lines;
    bool ends_with_newline = true;
};

Lines split_lines(const std::string& text) {
    Lines out;
    if (text.empty()) {
        out.ends_with_newline = true;  // empty file has no dangling line
        return out;
    }
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            out.lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) {
        out.lines.push_back(current);
        out.ends_with_newline = false;
    }
    return out;
}

std::string join_lines(const std::vector<std::string>& lines, bool final_newline) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 < lines.size() || final_newline) out.push_back('\n');
    }
    return out;
}

enum class Op { keep, del, ins };

// Classic LCS edit script; inputs are small source files so the quadratic
// table is fine. Oversized inputs degrade to trimming the common prefix and
// suffix and replacing the middle wholesale.
std::vector<std::pair<Op, std::string>> edit_script(const std::vector<std::string>& a,
                                                    const std::vector<std::string>& b) {
    size_t pre = 0;
    while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
    size_t suf = 0;
    while (suf < a.size() - pre && suf < b.size() - pre &&
           a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) {
        ++suf;
    }
    size_t n = a.size() - pre - suf;
    size_t m = b.size() - pre - suf;

    std::vector<std::pair<Op, std::string>> script;
    script.reserve(a.size() + b.size());
    for (size_t i = 0; i < pre; ++i) script.emplace_back(Op::keep, a[i]);

    if (n * m > 16u * 1024u * 1024u) {
        for (size_t i = 0; i < n; ++i) script.emplace_back(Op::del, a[pre + i]);
        for (size_t j = 0; j < m; ++j) script.emplace_back(Op::ins, b[pre + j]);
    } else if (n != 0 || m != 0) {
        std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
        for (size_t i = n; i-- > 0;) {
            for (size_t j = m; j-- > 0;) {
                lcs[i][j] = (a[pre + i] == b[pre + j])
                                ? lcs[i + 1][j + 1] + 1
                                : std::max(lcs[i + 1][j], lcs[i][j + 1]);
            }
        }
        size_t i = 0, j = 0;
        while (i < n && j < m) {
            if (a[pre + i] == b[pre + j]) {
                script.emplace_back(Op::keep, a[pre + i]);
                ++i;
                ++j;
            } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
                script.emplace_back(Op::del, a[pre + i]);
                ++i;
            } else {
                script.emplace_back(Op::ins, b[pre + j]);
                ++j;
            }
        }
        for (; i < n; ++i) script.emplace_back(Op::del, a[pre + i]);
        for (; j < m; ++j) script.emplace_back(Op::ins, b[pre + j]);
    }

    for (size_t i = 0; i < suf; ++i) script.emplace_back(Op::keep, a[a.size() - suf + i]);
    return script;
}

std::string format_range(int start, int count) {
    if (count == 1) return std::to_string(start);
    return std::to_string(start) + "," + std::to_string(count);
}

}  // namespace

std::string make_unified_diff(const std::string& path, const std::string& old_text,
                              const std::string& new_text, int context) {
    if (old_text == new_text) return {};
    Lines a = split_lines(old_text);
    Lines b = split_lines(new_text);
    auto script = edit_script(a.lines, b.lines);

    // Indices of non-keep entries.
    std::vector<size_t> changes;
    for (size_t i = 0; i < script.size(); ++i) {
        if (script[i].first != Op::keep) changes.push_back(i);
    }
    if (changes.empty()) {
        // Only the trailing-newline state differs; force a hunk on the last line.
        if (!a.lines.empty()) changes.push_back(script.size() - 1);
    }

    std::ostringstream os;
    os << "--- a/" << path << "\n";
    os << "+++ b/" << path << "\n";

    size_t idx = 0;
    int old_line = 1, new_line = 1;
    size_t script_pos = 0;

    auto advance_to = [&](size_t target) {
        while (script_pos < target) {
            switch (script[script_pos].first) {
                case Op::keep: ++old_line; ++new_line; break;
                case Op::del: ++old_line; break;
                case Op::ins: ++new_line; break;
            }
            ++script_pos;
        }
    };

    while (idx < changes.size()) {
        size_t group_begin = changes[idx];
        size_t group_end = changes[idx];
        while (idx + 1 < changes.size() &&
               changes[idx + 1] - group_end <= static_cast<size_t>(2 * context) + 1) {
            ++idx;
            group_end = changes[idx];
        }
        ++idx;

        size_t hunk_begin = group_begin >= static_cast<size_t>(context)
                                ? group_begin - static_cast<size_t>(context)
                                : 0;
        size_t hunk_end = std::min(script.size(), group_end + static_cast<size_t>(context) + 1);

        advance_to(hunk_begin);
        int h_old_start = old_line, h_new_start = new_line;
        int h_old_count = 0, h_new_count = 0;
        std::string body;
        bool hunk_touches_old_eof = false, hunk_touches_new_eof = false;

        for (size_t i = hunk_begin; i < hunk_end; ++i) {
            const auto& [op, line] = script[i];
            switch (op) {
                case Op::keep:
                    body += " " + line + "\n";
                    ++h_old_count;
                    ++h_new_count;
                    ++old_line;
                    ++new_line;
                    break;
                case Op::del:
                    body += "-" + line + "\n";
                    ++h_old_count;
                    ++old_line;
                    if (!a.ends_with_newline && old_line == static_cast<int>(a.lines.size()) + 1) {
                        body += std::string(kNoNewline) + "\n";
                        hunk_touches_old_eof = true;
                    }
                    break;
                case Op::ins:
                    body += "+" + line + "\n";
                    ++h_new_count;
                    ++new_line;
                    if (!b.ends_with_newline && new_line == static_cast<int>(b.lines.size()) + 1) {
                        body += std::string(kNoNewline) + "\n";
                        hunk_touches_new_eof = true;
                    }
                    break;
            }
            if (op == Op::keep && !a.ends_with_newline &&
                old_line == static_cast<int>(a.lines.size()) + 1 && !hunk_touches_old_eof &&
                !hunk_touches_new_eof) {
                body += std::string(kNoNewline) + "\n";
            }
        }
        script_pos = hunk_end;

        os << "@@ -" << format_range(h_old_count == 0 ? h_old_start - 1 : h_old_start, h_old_count)
           << " +" << format_range(h_new_count == 0 ? h_new_start - 1 : h_new_start, h_new_count)
           << " @@\n";
        os << body;
    }
    return os.str();
}

FileDiff parse_unified_diff(const std::string& diff_text) {
    FileDiff out;
    Lines raw = split_lines(diff_text);
    size_t i = 0;
    const auto& L = raw.lines;

    while (i < L.size() && L[i].rfind("--- ", 0) != 0) ++i;
    if (i + 1 >= L.size() || L[i + 1].rfind("+++ ", 0) != 0) {
        throw Error(ErrorCode::config_error, "diff is missing ---/+++ headers");
    }
    out.old_path = L[i].substr(4);
    out.new_path = L[i + 1].substr(4);
    // Strip timestamps (paths and timestamps separated by a tab).
    auto strip_tab = [](std::string& s) {
        size_t tab = s.find('\t');
        if (tab != std::string::npos) s = s.substr(0, tab);
    };
    strip_tab(out.old_path);
    strip_tab(out.new_path);
    i += 2;

    while (i < L.size()) {
        const std::string& line = L[i];
        if (line.rfind("--- ", 0) == 0) {
            throw Error(ErrorCode::config_error, "diff touches more than one file");
        }
        if (line.rfind("@@", 0) != 0) {
            ++i;
            continue;
        }
        DiffHunk hunk;
        int parsed = std::sscanf(line.c_str(), "@@ -%d,%d +%d,%d @@", &hunk.old_start,
                                 &hunk.old_count, &hunk.new_start, &hunk.new_count);
        if (parsed != 4) {
            hunk.old_count = 1;
            hunk.new_count = 1;
            parsed = std::sscanf(line.c_str(), "@@ -%d,%d +%d @@", &hunk.old_start,
                                 &hunk.old_count, &hunk.new_start);
            if (parsed != 3) {
                parsed = std::sscanf(line.c_str(), "@@ -%d +%d,%d @@", &hunk.old_start,
                                     &hunk.new_start, &hunk.new_count);
                if (parsed != 3) {
                    parsed = std::sscanf(line.c_str(), "@@ -%d +%d @@", &hunk.old_start,
                                         &hunk.new_start);
                    if (parsed != 2) {
                        throw Error(ErrorCode::config_error, "malformed hunk header: " + line);
                    }
                }
            }
        }
        ++i;
        int old_seen = 0, new_seen = 0;
        while (i < L.size() && (old_seen < hunk.old_count || new_seen < hunk.new_count)) {
            const std::string& body = L[i];
            if (body == kNoNewline) {
                hunk.lines.push_back(body);
                ++i;
                continue;
            }
            if (body.empty()) {
                // Tolerate a bare empty line as an empty context line.
                hunk.lines.push_back(" ");
                ++old_seen;
                ++new_seen;
                ++i;
                continue;
            }
            char tag = body[0];
            if (tag == ' ') {
                ++old_seen;
                ++new_seen;
            } else if (tag == '-') {
                ++old_seen;
            } else if (tag == '+') {
                ++new_seen;
            } else {
                throw Error(ErrorCode::config_error, "unexpected line in hunk: " + body);
            }
            hunk.lines.push_back(body);
            ++i;
        }
        if (i < L.size() && L[i] == kNoNewline) {
            hunk.lines.push_back(L[i]);
            ++i;
        }
        if (old_seen != hunk.old_count || new_seen != hunk.new_count) {
            throw Error(ErrorCode::config_error, "hunk body does not match its header counts");
        }
        out.hunks.push_back(std::move(hunk));
    }
    if (out.hunks.empty()) {
        throw Error(ErrorCode::config_error, "diff contains no hunks");
    }
    return out;
}

std::string diff_target_path(const FileDiff& diff) {
    std::string p = diff.new_path.empty() || diff.new_path == "/dev/null" ? diff.old_path
                                                                          : diff.new_path;
    if (p.rfind("b/", 0) == 0 || p.rfind("a/", 0) == 0) return p.substr(2);
    return p;
}

ApplyResultText apply_unified_diff(const std::string& diff_text,
                                   const std::string& current_text) {
    ApplyResultText result;
    FileDiff diff;
    try {
        diff = parse_unified_diff(diff_text);
    } catch (const Error& e) {
        result.conflict = e.what();
        return result;
    }

    Lines current = split_lines(current_text);
    std::vector<std::string> out_lines;
    bool out_final_newline = current.ends_with_newline;
    size_t consumed = 0;  // lines of `current` copied so far

    for (const DiffHunk& hunk : diff.hunks) {
        size_t hunk_old_begin;
        if (hunk.old_count == 0) {
            hunk_old_begin = static_cast<size_t>(hunk.old_start);  // insert after this line
        } else {
            hunk_old_begin = static_cast<size_t>(hunk.old_start - 1);
        }
        if (hunk_old_begin < consumed || hunk_old_begin > current.lines.size()) {
            result.conflict = "hunk @@ -" + std::to_string(hunk.old_start) +
                              " overlaps earlier hunk or exceeds the file";
            return result;
        }
        for (size_t i = consumed; i < hunk_old_begin; ++i) out_lines.push_back(current.lines[i]);
        consumed = hunk_old_begin;

        bool pending_no_newline_new = false;
        for (size_t li = 0; li < hunk.lines.size(); ++li) {
            const std::string& entry = hunk.lines[li];
            if (entry == kNoNewline) {
                // Applies to the previous '-' / ' ' (old side) or '+' (new side).
                if (li > 0 && hunk.lines[li - 1][0] == '+') pending_no_newline_new = true;
                continue;
            }
            char tag = entry[0];
            std::string text = entry.substr(1);
            if (tag == ' ' || tag == '-') {
                if (consumed >= current.lines.size() || current.lines[consumed] != text) {
                    result.conflict = "context mismatch at line " + std::to_string(consumed + 1) +
                                      ": expected \"" + text + "\"";
                    return result;
                }
                if (tag == ' ') out_lines.push_back(text);
                ++consumed;
            } else {  // '+'
                out_lines.push_back(text);
            }
        }
        if (pending_no_newline_new) out_final_newline = false;
    }
    for (size_t i = consumed; i < current.lines.size(); ++i) out_lines.push_back(current.lines[i]);

    result.ok = true;
    result.new_text = join_lines(out_lines, out_final_newline || out_lines.empty());
    return result;
}

}  // namespace sysopt
