#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "sysopt/code_model.hpp"
#include "sysopt/fs.hpp"

namespace testutil {

inline std::string fixture(const std::string& rel) {
    return std::string(SYSOPT_FIXTURES_DIR) + "/" + rel;
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng(std::random_device{}());
        for (int attempt = 0; attempt < 64; ++attempt) {
            auto candidate = base / ("sysopt_" + tag + "_" + std::to_string(rng()));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path.string(); }
};

inline void copy_tree(const std::string& from, const std::string& to) {
    std::filesystem::copy(from, to,
                          std::filesystem::copy_options::recursive |
                              std::filesystem::copy_options::overwrite_existing);
}

// Strips // and /* */ comments plus string/char literal contents, keeping
// line structure. Independent of the production lexer on purpose: a plain
// character walk used by the oracle checks.
inline std::string strip_comments_and_strings(const std::string& src) {
    std::string out;
    out.reserve(src.size());
    enum { code, line_comment, block_comment, str, chr } state = code;
    for (size_t i = 0; i < src.size(); ++i) {
        char c = src[i];
        char next = i + 1 < src.size() ? src[i + 1] : '\0';
        switch (state) {
            case code:
                if (c == '/' && next == '/') { state = line_comment; ++i; out += "  "; }
                else if (c == '/' && next == '*') { state = block_comment; ++i; out += "  "; }
                else if (c == '"') { state = str; out += '"'; }
                else if (c == '\'') { state = chr; out += '\''; }
                else out += c;
                break;
            case line_comment:
                if (c == '\n') { state = code; out += '\n'; }
                else out += ' ';
                break;
            case block_comment:
                if (c == '*' && next == '/') { state = code; ++i; out += "  "; }
                else out += (c == '\n' ? '\n' : ' ');
                break;
            case str:
                if (c == '\\') { out += "  "; ++i; }
                else if (c == '"') { state = code; out += '"'; }
                else out += (c == '\n' ? '\n' : ' ');
                break;
            case chr:
                if (c == '\\') { out += "  "; ++i; }
                else if (c == '\'') { state = code; out += '\''; }
                else out += ' ';
                break;
        }
    }
    return out;
}

}  // namespace testutil
