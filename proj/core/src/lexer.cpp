#include "sysopt/lexer.hpp"

#include <cctype>

namespace sysopt {

namespace {

bool ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool ident_cont(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

struct Cursor {
    const std::string& text;
    size_t i = 0;
    int line = 1;
    int col = 1;

    bool done() const { return i >= text.size(); }
    char peek(size_t ahead = 0) const {
        return i + ahead < text.size() ? text[i + ahead] : '\0';
    }
    void advance() {
        if (done()) return;
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    }
};

char unescape(char c) {
    switch (c) {
        case 'n': return '\n';
        case 't': return '\t';
        case 'r': return '\r';
        case 'b': return '\b';
        case 'f': return '\f';
        case '0': return '\0';
        default: return c;  // \" \\ \' and anything else map to themselves
    }
}

}  // namespace

LexResult lex_source(const std::string& text, const std::string& path) {
    LexResult out;
    Cursor cur{text};

    auto diag = [&](Severity sev, int line, int col, const char* code, const std::string& msg) {
        out.diagnostics.push_back({sev, path, line, col, code, msg});
    };

    while (!cur.done()) {
        char c = cur.peek();

        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            cur.advance();
            continue;
        }

        if (c == '/' && cur.peek(1) == '/') {
            while (!cur.done() && cur.peek() != '\n') cur.advance();
            continue;
        }

        if (c == '/' && cur.peek(1) == '*') {
            int line = cur.line, col = cur.col;
            cur.advance();
            cur.advance();
            bool closed = false;
            while (!cur.done()) {
                if (cur.peek() == '*' && cur.peek(1) == '/') {
                    cur.advance();
                    cur.advance();
                    closed = true;
                    break;
                }
                cur.advance();
            }
            if (!closed) diag(Severity::error, line, col, "unterminated-comment", "block comment never closes");
            continue;
        }

        Token tok;
        tok.line = cur.line;
        tok.col = cur.col;

        if (c == '"') {
            // Text block ("""...""") or ordinary string literal.
            if (cur.peek(1) == '"' && cur.peek(2) == '"') {
                tok.kind = TokenKind::string_lit;
                tok.text = "\"\"\"";
                cur.advance();
                cur.advance();
                cur.advance();
                bool closed = false;
                while (!cur.done()) {
                    if (cur.peek() == '"' && cur.peek(1) == '"' && cur.peek(2) == '"') {
                        tok.end_line = cur.line;
                        tok.end_col = cur.col + 2;
                        cur.advance();
                        cur.advance();
                        cur.advance();
                        closed = true;
                        break;
                    }
                    tok.value.push_back(cur.peek());
                    cur.advance();
                }
                if (!closed) {
                    tok.end_line = cur.line;
                    tok.end_col = cur.col;
                    diag(Severity::error, tok.line, tok.col, "unterminated-string", "text block never closes");
                }
                tok.text += tok.value + "\"\"\"";
            } else {
                tok.kind = TokenKind::string_lit;
                tok.text = "\"";
                cur.advance();
                bool closed = false;
                while (!cur.done() && cur.peek() != '\n') {
                    char sc = cur.peek();
                    if (sc == '\\') {
                        tok.text.push_back(sc);
                        cur.advance();
                        if (!cur.done()) {
                            tok.text.push_back(cur.peek());
                            tok.value.push_back(unescape(cur.peek()));
                            cur.advance();
                        }
                        continue;
                    }
                    if (sc == '"') {
                        tok.text.push_back('"');
                        tok.end_line = cur.line;
                        tok.end_col = cur.col;
                        cur.advance();
                        closed = true;
                        break;
                    }
                    tok.text.push_back(sc);
                    tok.value.push_back(sc);
                    cur.advance();
                }
                if (!closed) {
                    tok.end_line = cur.line;
                    tok.end_col = cur.col > 1 ? cur.col - 1 : 1;
                    diag(Severity::error, tok.line, tok.col, "unterminated-string", "string literal never closes");
                }
            }
            out.tokens.push_back(std::move(tok));
            continue;
        }

        if (c == '\'') {
            tok.kind = TokenKind::char_lit;
            tok.text = "'";
            cur.advance();
            while (!cur.done() && cur.peek() != '\n') {
                char sc = cur.peek();
                tok.text.push_back(sc);
                if (sc == '\\') {
                    cur.advance();
                    if (!cur.done()) {
                        tok.text.push_back(cur.peek());
                        cur.advance();
                    }
                    continue;
                }
                if (sc == '\'') {
                    tok.end_line = cur.line;
                    tok.end_col = cur.col;
                    cur.advance();
                    break;
                }
                cur.advance();
            }
            if (tok.end_line == 0) {
                tok.end_line = cur.line;
                tok.end_col = cur.col > 1 ? cur.col - 1 : 1;
                diag(Severity::error, tok.line, tok.col, "unterminated-char", "char literal never closes");
            }
            out.tokens.push_back(std::move(tok));
            continue;
        }

        if (ident_start(static_cast<unsigned char>(c))) {
            tok.kind = TokenKind::identifier;
            while (!cur.done() && ident_cont(static_cast<unsigned char>(cur.peek()))) {
                tok.text.push_back(cur.peek());
                tok.end_line = cur.line;
                tok.end_col = cur.col;
                cur.advance();
            }
            out.tokens.push_back(std::move(tok));
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            tok.kind = TokenKind::number;
            while (!cur.done()) {
                char nc = cur.peek();
                bool take = std::isalnum(static_cast<unsigned char>(nc)) || nc == '_';
                // Decimal point belongs to the number only when a digit follows.
                if (!take && nc == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1)))) take = true;
                if (!take) break;
                tok.text.push_back(nc);
                tok.end_line = cur.line;
                tok.end_col = cur.col;
                cur.advance();
            }
            out.tokens.push_back(std::move(tok));
            continue;
        }

        tok.kind = TokenKind::punct;
        tok.text.push_back(c);
        tok.end_line = cur.line;
        tok.end_col = cur.col;
        cur.advance();
        out.tokens.push_back(std::move(tok));
    }

    Token eof;
    eof.kind = TokenKind::eof;
    eof.line = cur.line;
    eof.col = cur.col;
    eof.end_line = cur.line;
    eof.end_col = cur.col;
    out.tokens.push_back(std::move(eof));
    return out;
}

}  // namespace sysopt
