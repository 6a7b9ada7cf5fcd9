#include "sysopt/span.hpp"

#include <algorithm>
#include <sstream>

namespace sysopt {

std::string slice_span(const std::string& file_text, const SourceSpan& span) {
    // Split once; spans are small and this keeps the indexing obvious.
    std::vector<std::string> lines;
    std::string current;
    for (char c : file_text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    lines.push_back(current);

    int first = std::clamp(span.start_line, 1, static_cast<int>(lines.size()));
    int last = std::clamp(span.end_line, first, static_cast<int>(lines.size()));

    std::string out;
    for (int ln = first; ln <= last; ++ln) {
        const std::string& line = lines[static_cast<size_t>(ln - 1)];
        int from = (ln == span.start_line) ? span.start_col - 1 : 0;
        int to = (ln == span.end_line) ? span.end_col : static_cast<int>(line.size());
        from = std::clamp(from, 0, static_cast<int>(line.size()));
        to = std::clamp(to, from, static_cast<int>(line.size()));
        out.append(line.substr(static_cast<size_t>(from), static_cast<size_t>(to - from)));
        if (ln != last) out.push_back('\n');
    }
    return out;
}

std::string Diagnostic::to_line() const {
    std::ostringstream os;
    os << path << ':' << line << ':' << col << ": " << code << ": " << message;
    return os.str();
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        out += d.to_line();
        out.push_back('\n');
    }
    return out;
}

}  // namespace sysopt
