#pragma once

#include <compare>
#include <string>
#include <vector>

namespace sysopt {

// 1-based, inclusive line/column range inside one repository-relative file.
// Columns are byte offsets within the line; a tab counts as one column.
struct SourceSpan {
    std::string path;
    int start_line = 1;
    int end_line = 1;
    int start_col = 1;
    int end_col = 1;

    auto operator<=>(const SourceSpan&) const = default;
    bool operator==(const SourceSpan&) const = default;
};

// Returns the text covered by `span` in `file_text` (inclusive of both ends).
// Out-of-range coordinates are clamped to the file.
std::string slice_span(const std::string& file_text, const SourceSpan& span);

enum class Severity { warning, error };

struct Diagnostic {
    Severity severity = Severity::warning;
    std::string path;
    int line = 0;
    int col = 0;
    std::string code;
    std::string message;

    // Structured form: "path:line:col: code: message"
    std::string to_line() const;
};

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

}  // namespace sysopt
