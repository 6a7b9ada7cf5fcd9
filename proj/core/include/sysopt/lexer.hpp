#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sysopt/span.hpp"

namespace sysopt {

enum class TokenKind { identifier, number, string_lit, char_lit, punct, eof };

struct Token {
    TokenKind kind = TokenKind::eof;
    std::string text;   // raw lexeme (for string literals, includes quotes)
    std::string value;  // unescaped value for string literals
    int line = 0;
    int col = 0;
    int end_line = 0;
    int end_col = 0;

    bool is_punct(char c) const { return kind == TokenKind::punct && text.size() == 1 && text[0] == c; }
    bool is_ident(std::string_view s) const { return kind == TokenKind::identifier && text == s; }
};

struct LexResult {
    std::vector<Token> tokens;  // terminated by an eof token
    std::vector<Diagnostic> diagnostics;
};

// Tokenizes Java-style source. Comments are dropped; string and char
// literals become single tokens, so their contents never look like code.
LexResult lex_source(const std::string& text, const std::string& path);

}  // namespace sysopt
