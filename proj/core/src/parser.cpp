#include "sysopt/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "sysopt/error.hpp"
#include "sysopt/fingerprint.hpp"
#include "sysopt/fs.hpp"
#include "sysopt/glob.hpp"
#include "sysopt/lexer.hpp"

namespace sysopt {

namespace {

const std::set<std::string>& stmt_keywords() {
    static const std::set<std::string> kw = {
        "if", "else", "for", "while", "do", "switch", "case", "default", "try",
        "catch", "finally", "return", "throw", "throws", "break", "continue",
        "new", "synchronized", "assert", "instanceof", "this", "super", "null",
        "true", "false", "yield", "class", "interface", "enum", "extends",
        "implements", "package", "import", "void", "static", "final", "public",
        "private", "protected", "abstract", "volatile", "transient", "native",
        "strictfp", "sealed", "permits",
    };
    return kw;
}

bool is_modifier_word(const std::string& s) {
    static const std::set<std::string> mods = {
        "public", "protected", "private", "static", "final", "abstract",
        "synchronized", "volatile", "transient", "native", "strictfp",
        "sealed", "default",
    };
    return mods.count(s) > 0;
}

struct Mods {
    Visibility visibility = Visibility::package_v;
    bool is_static = false;
    bool is_final = false;
    bool is_volatile = false;
    bool is_synchronized = false;
    bool is_abstract = false;
    std::optional<SourceSpan> sync_span;
};

SourceSpan token_span(const std::string& path, const Token& t) {
    return SourceSpan{path, t.line, t.end_line, t.col, t.end_col};
}

SourceSpan span_between(const std::string& path, const Token& a, const Token& b) {
    return SourceSpan{path, a.line, b.end_line, a.col, b.end_col};
}

class UnitParser {
public:
    UnitParser(const std::string& text, const std::string& path)
        : text_(text), path_(path) {
        LexResult lexed = lex_source(text, path);
        toks_ = std::move(lexed.tokens);
        out_.diagnostics = std::move(lexed.diagnostics);
    }

    ParsedUnit run() {
        int last_line = 1;
        for (char c : text_) {
            if (c == '\n') ++last_line;
        }
        out_.unit.span = SourceSpan{path_, 1, last_line, 1, 1};

        parse_compilation_unit();
        return std::move(out_);
    }

private:
    const std::string& text_;
    std::string path_;
    std::vector<Token> toks_;
    size_t p_ = 0;
    ParsedUnit out_;

    // --- cursor helpers -------------------------------------------------

    const Token& cur() const { return toks_[p_]; }
    const Token& at(size_t ahead) const {
        size_t i = p_ + ahead;
        return toks_[std::min(i, toks_.size() - 1)];
    }
    const Token& tok(size_t index) const { return toks_[std::min(index, toks_.size() - 1)]; }
    void adv() {
        if (p_ + 1 < toks_.size()) ++p_;
    }
    bool eof() const { return cur().kind == TokenKind::eof; }

    void diag(Severity sev, const Token& t, const char* code, const std::string& msg) {
        out_.diagnostics.push_back({sev, path_, t.line, t.col, code, msg});
    }

    // --- small parsers ---------------------------------------------------

    std::string parse_dotted() {
        std::string name;
        while (cur().kind == TokenKind::identifier) {
            name += cur().text;
            adv();
            if (cur().is_punct('.') && at(1).kind == TokenKind::identifier) {
                name += '.';
                adv();
            } else if (cur().is_punct('.') && at(1).is_punct('*')) {
                name += ".*";
                adv();
                adv();
                break;
            } else {
                break;
            }
        }
        return name;
    }

    // Skips a balanced <...> starting at '<'. Bails out (returns false,
    // cursor restored) when the brackets do not balance before ; { or eof.
    bool skip_angles() {
        size_t save = p_;
        int depth = 0;
        do {
            if (cur().is_punct('<')) ++depth;
            else if (cur().is_punct('>')) --depth;
            else if (cur().is_punct(';') || cur().is_punct('{') || cur().is_punct('}') || eof()) {
                p_ = save;
                return false;
            }
            adv();
        } while (depth > 0 && !eof());
        return true;
    }

    void skip_balanced_braces() {
        // cur() must be '{'
        int depth = 0;
        while (!eof()) {
            if (cur().is_punct('{')) ++depth;
            else if (cur().is_punct('}')) {
                --depth;
                if (depth == 0) {
                    adv();
                    return;
                }
            }
            adv();
        }
    }

    void skip_balanced_parens() {
        int depth = 0;
        while (!eof()) {
            if (cur().is_punct('(')) ++depth;
            else if (cur().is_punct(')')) {
                --depth;
                if (depth == 0) {
                    adv();
                    return;
                }
            }
            adv();
        }
    }

    std::vector<AnnotationFact> parse_annotations() {
        std::vector<AnnotationFact> out;
        while (cur().is_punct('@')) {
            if (at(1).is_ident("interface")) break;  // annotation type declaration
            const Token& start = cur();
            adv();
            AnnotationFact a;
            a.name = parse_dotted();
            const Token* end = &toks_[p_ > 0 ? p_ - 1 : 0];
            if (a.name.empty()) {
                diag(Severity::warning, start, "construct-skipped", "stray '@'");
                break;
            }
            if (cur().is_punct('(')) {
                int depth = 0;
                while (!eof()) {
                    if (cur().is_punct('(')) ++depth;
                    else if (cur().is_punct(')')) {
                        --depth;
                        if (depth == 0) {
                            end = &cur();
                            adv();
                            break;
                        }
                    } else if (cur().kind == TokenKind::string_lit) {
                        a.string_arguments.push_back(cur().value);
                    }
                    adv();
                }
            }
            a.span = span_between(path_, start, *end);
            out.push_back(std::move(a));
        }
        return out;
    }

    Mods parse_modifiers(std::vector<AnnotationFact>& annotations) {
        Mods m;
        for (;;) {
            if (cur().is_punct('@')) {
                if (at(1).is_ident("interface")) break;
                auto more = parse_annotations();
                annotations.insert(annotations.end(), more.begin(), more.end());
                continue;
            }
            if (cur().kind != TokenKind::identifier || !is_modifier_word(cur().text)) break;
            const std::string& w = cur().text;
            if (w == "public") m.visibility = Visibility::public_v;
            else if (w == "protected") m.visibility = Visibility::protected_v;
            else if (w == "private") m.visibility = Visibility::private_v;
            else if (w == "static") m.is_static = true;
            else if (w == "final") m.is_final = true;
            else if (w == "volatile") m.is_volatile = true;
            else if (w == "abstract") m.is_abstract = true;
            else if (w == "synchronized") {
                m.is_synchronized = true;
                m.sync_span = token_span(path_, cur());
            }
            adv();
        }
        return m;
    }

    // Canonical textual type reference: dotted name with generic arguments
    // stripped and array suffixes kept. Returns empty when not at a type.
    std::string parse_type_ref(SourceSpan* first_token_span = nullptr) {
        if (cur().kind != TokenKind::identifier) return {};
        if (stmt_keywords().count(cur().text) && cur().text != "void") return {};
        if (first_token_span) *first_token_span = token_span(path_, cur());
        std::string name = cur().text;
        adv();
        while (cur().is_punct('.') && at(1).kind == TokenKind::identifier) {
            adv();
            name += '.';
            name += cur().text;
            adv();
        }
        if (cur().is_punct('<')) skip_angles();
        while (cur().is_punct('[') && at(1).is_punct(']')) {
            name += "[]";
            adv();
            adv();
        }
        return name;
    }

    // Skip to a recovery point: past a ';' or a balanced '{...}', or stop
    // before a '}' that closes the enclosing scope.
    void resync() {
        int paren = 0;
        while (!eof()) {
            if (cur().is_punct('(')) ++paren;
            else if (cur().is_punct(')')) --paren;
            else if (cur().is_punct(';') && paren <= 0) {
                adv();
                return;
            } else if (cur().is_punct('{')) {
                skip_balanced_braces();
                return;
            } else if (cur().is_punct('}')) {
                return;
            }
            adv();
        }
    }

    // --- compilation unit -------------------------------------------------

    void parse_compilation_unit() {
        if (cur().is_ident("package")) {
            adv();
            std::string pkg = parse_dotted();
            static const std::regex pkg_re("[A-Za-z_][A-Za-z0-9_.]*");
            if (!std::regex_match(pkg, pkg_re)) {
                diag(Severity::warning, cur(), "bad-package", "package name rejected: " + pkg);
                pkg.clear();
            }
            out_.unit.package_name = pkg;
            if (cur().is_punct(';')) adv();
        }
        while (cur().is_ident("import")) {
            adv();
            if (cur().is_ident("static")) adv();
            std::string imp = parse_dotted();
            if (!imp.empty()) out_.unit.imports.push_back(imp);
            if (cur().is_punct(';')) adv();
        }
        while (!eof()) {
            if (cur().is_punct(';')) {
                adv();
                continue;
            }
            size_t first_tok = p_;
            std::vector<AnnotationFact> annotations = parse_annotations();
            Mods mods = parse_modifiers(annotations);
            if (cur().is_ident("class") || cur().is_ident("interface") || cur().is_ident("enum")) {
                parse_type_decl(std::move(annotations), mods, out_.unit.package_name, first_tok);
            } else {
                diag(Severity::warning, cur(), "construct-skipped",
                     "unrecognized top-level construct near '" + cur().text + "'");
                resync();
                if (cur().is_punct('}')) adv();  // stray brace at top level
            }
        }
    }

    // --- type declarations -------------------------------------------------

    void parse_type_decl(std::vector<AnnotationFact> annotations, const Mods& mods,
                         const std::string& enclosing, size_t first_tok) {
        TypeDecl td;
        td.kind = cur().is_ident("interface") ? TypeKind::interface_k
                : cur().is_ident("enum")      ? TypeKind::enum_k
                                              : TypeKind::class_k;
        adv();
        if (cur().kind != TokenKind::identifier) {
            diag(Severity::error, cur(), "construct-skipped", "type declaration without a name");
            resync();
            return;
        }
        td.name = cur().text;
        td.qualified_name = enclosing.empty() ? td.name : enclosing + "." + td.name;
        td.visibility = mods.visibility;
        td.annotations = std::move(annotations);
        adv();
        if (cur().is_punct('<')) skip_angles();

        while (cur().is_ident("extends") || cur().is_ident("implements") || cur().is_ident("permits")) {
            bool keep = !cur().is_ident("permits");
            adv();
            for (;;) {
                std::string sup = parse_type_ref();
                if (sup.empty()) break;
                if (keep) td.supertypes.push_back(sup);
                if (cur().is_punct(',')) adv();
                else break;
            }
        }

        if (!cur().is_punct('{')) {
            diag(Severity::error, cur(), "construct-skipped",
                 "type body expected for " + td.name);
            resync();
            return;
        }

        td.body_open_line = cur().line;
        td.body_open_col = cur().col;

        // Reserve the slot so enclosing types precede their nested types.
        size_t slot = out_.unit.types.size();
        out_.unit.types.emplace_back();

        adv();  // consume '{'
        if (td.kind == TypeKind::enum_k) parse_enum_constants();
        parse_type_body(td);

        td.span = span_between(path_, tok(first_tok), toks_[p_ > 0 ? p_ - 1 : 0]);
        for (MethodDecl& m : td.methods) {
            std::string params;
            for (size_t i = 0; i < m.parameters.size(); ++i) {
                if (i) params += ',';
                params += m.parameters[i].type;
            }
            m.signature_key = td.qualified_name + "#" + m.name + "(" + params + ")";
        }
        out_.unit.types[slot] = std::move(td);
    }

    void parse_enum_constants() {
        while (!eof()) {
            if (cur().is_punct(';')) {
                adv();
                return;  // members follow
            }
            if (cur().is_punct('}')) return;  // constant-only enum; body loop closes
            parse_annotations();
            if (cur().kind != TokenKind::identifier) {
                diag(Severity::warning, cur(), "construct-skipped", "unexpected token in enum constants");
                resync();
                return;
            }
            adv();  // constant name
            if (cur().is_punct('(')) skip_balanced_parens();
            if (cur().is_punct('{')) {
                diag(Severity::warning, cur(), "anon-class-skipped",
                     "enum constant body treated as opaque");
                skip_balanced_braces();
            }
            if (cur().is_punct(',')) adv();
        }
    }

    struct PendingBody {
        size_t method_index;
        size_t open_tok;
        size_t close_tok;
    };

    void parse_type_body(TypeDecl& td) {
        std::vector<PendingBody> bodies;
        while (!eof()) {
            if (cur().is_punct('}')) {
                adv();
                scan_pending_bodies(td, bodies);
                return;
            }
            if (cur().is_punct(';')) {
                adv();
                continue;
            }
            size_t first_tok = p_;
            std::vector<AnnotationFact> annotations = parse_annotations();
            Mods mods = parse_modifiers(annotations);

            if (cur().is_ident("class") || cur().is_ident("interface") || cur().is_ident("enum")) {
                parse_type_decl(std::move(annotations), mods, td.qualified_name, first_tok);
                continue;
            }
            if (cur().is_punct('{')) {
                // static/instance initializer block: outside the subset
                diag(Severity::warning, cur(), "construct-skipped", "initializer block treated as opaque");
                skip_balanced_braces();
                continue;
            }
            if (cur().is_punct('<')) {
                if (!skip_angles()) {
                    diag(Severity::warning, cur(), "construct-skipped", "unbalanced type parameters");
                    resync();
                    continue;
                }
            }

            // Constructor: the class's simple name immediately followed by '('.
            if (cur().kind == TokenKind::identifier && cur().text == td.name && at(1).is_punct('(')) {
                const Token& name_tok = cur();
                adv();
                parse_method_rest(td, bodies, std::move(annotations), mods, first_tok,
                                  name_tok.text, "", true);
                continue;
            }

            SourceSpan type_span;
            std::string type_text = parse_type_ref(&type_span);
            if (type_text.empty()) {
                diag(Severity::warning, cur(), "construct-skipped",
                     "unrecognized member near '" + cur().text + "'");
                resync();
                continue;
            }
            if (cur().kind != TokenKind::identifier) {
                diag(Severity::warning, cur(), "construct-skipped",
                     "member name expected after type '" + type_text + "'");
                resync();
                continue;
            }
            std::string member_name = cur().text;
            adv();

            if (cur().is_punct('(')) {
                parse_method_rest(td, bodies, std::move(annotations), mods, first_tok,
                                  member_name, type_text, false);
            } else {
                parse_field_declarators(td, mods, first_tok, type_text, type_span, member_name);
            }
        }
        diag(Severity::error, toks_.back(), "unbalanced-braces",
             "type body for " + td.name + " never closes");
        scan_pending_bodies(td, bodies);
    }

    void parse_field_declarators(TypeDecl& td, const Mods& mods, size_t first_tok,
                                 const std::string& type_text, const SourceSpan& type_span,
                                 std::string name) {
        for (;;) {
            FieldDecl fd;
            fd.name = std::move(name);
            fd.declared_type = type_text;
            fd.visibility = mods.visibility;
            fd.is_static = mods.is_static;
            fd.is_final = mods.is_final;
            fd.is_volatile = mods.is_volatile;
            fd.type_token_span = type_span;
            while (cur().is_punct('[') && at(1).is_punct(']')) {
                fd.declared_type += "[]";
                adv();
                adv();
            }
            if (fd.is_volatile && fd.is_final) {
                diag(Severity::warning, tok(first_tok), "bad-modifiers",
                     "field cannot be both volatile and final; dropping final");
                fd.is_final = false;
            }
            if (cur().is_punct('=')) {
                adv();
                fd.initializer_kind = cur().is_ident("new") ? InitializerKind::new_expression
                                                            : InitializerKind::other;
                skip_initializer();
            } else {
                fd.initializer_kind = InitializerKind::none;
            }
            fd.span = span_between(path_, tok(first_tok), cur());
            td.fields.push_back(std::move(fd));

            if (cur().is_punct(',')) {
                adv();
                if (cur().kind != TokenKind::identifier) {
                    diag(Severity::warning, cur(), "construct-skipped", "field declarator expected");
                    resync();
                    return;
                }
                name = cur().text;
                adv();
                continue;
            }
            if (cur().is_punct(';')) adv();
            return;
        }
    }

    // Consumes an initializer expression up to a top-level ',' or ';'.
    void skip_initializer() {
        int paren = 0, brace = 0, bracket = 0, angle = 0;
        while (!eof()) {
            if (cur().is_punct('(')) ++paren;
            else if (cur().is_punct(')')) --paren;
            else if (cur().is_punct('{')) ++brace;
            else if (cur().is_punct('}')) {
                if (brace == 0) return;  // enclosing scope closes; let caller see it
                --brace;
            } else if (cur().is_punct('[')) ++bracket;
            else if (cur().is_punct(']')) --bracket;
            else if (cur().is_punct('<') && paren == 0 && brace == 0) ++angle;
            else if (cur().is_punct('>') && paren == 0 && brace == 0) angle = std::max(0, angle - 1);
            else if ((cur().is_punct(',') || cur().is_punct(';')) &&
                     paren == 0 && brace == 0 && bracket == 0 && angle == 0) {
                return;
            }
            adv();
        }
    }

    void parse_method_rest(TypeDecl& td, std::vector<PendingBody>& bodies,
                           std::vector<AnnotationFact> annotations, const Mods& mods,
                           size_t first_tok, const std::string& name,
                           const std::string& return_type, bool is_constructor) {
        MethodDecl md;
        md.name = name;
        md.visibility = mods.visibility;
        md.is_static = mods.is_static;
        md.is_synchronized = mods.is_synchronized;
        md.sync_keyword_span = mods.sync_span;
        md.is_constructor = is_constructor;
        md.return_type = return_type;
        md.annotations = std::move(annotations);
        md.parameters = parse_parameters();

        if (cur().is_ident("throws")) {
            adv();
            for (;;) {
                if (parse_type_ref().empty()) break;
                if (cur().is_punct(',')) adv();
                else break;
            }
        }

        if (cur().is_punct('{')) {
            size_t open_tok = p_;
            size_t close_tok = find_matching_brace(open_tok);
            md.body_span = span_between(path_, tok(open_tok), tok(close_tok));
            md.span = span_between(path_, tok(first_tok), tok(close_tok));
            td.methods.push_back(std::move(md));
            bodies.push_back({td.methods.size() - 1, open_tok, close_tok});
            p_ = std::min(close_tok + 1, toks_.size() - 1);
        } else {
            if (cur().is_ident("default")) {
                adv();
                skip_initializer();
            }
            md.span = span_between(path_, tok(first_tok), cur());
            if (cur().is_punct(';')) adv();
            td.methods.push_back(std::move(md));
        }
    }

    std::vector<Param> parse_parameters() {
        std::vector<Param> params;
        if (!cur().is_punct('(')) return params;
        adv();
        for (;;) {
            if (cur().is_punct(')')) {
                adv();
                break;
            }
            if (eof()) break;
            parse_annotations();
            if (cur().is_ident("final")) adv();
            Param param;
            param.type = parse_type_ref();
            if (param.type.empty()) {
                // Not a recognizable parameter; bail out of the list.
                skip_to_close_paren();
                break;
            }
            if (cur().is_punct('.') && at(1).is_punct('.') && at(2).is_punct('.')) {
                param.type += "...";
                adv();
                adv();
                adv();
            }
            if (cur().kind == TokenKind::identifier) {
                param.name = cur().text;
                adv();
            }
            while (cur().is_punct('[') && at(1).is_punct(']')) {
                param.type += "[]";
                adv();
                adv();
            }
            params.push_back(std::move(param));
            if (cur().is_punct(',')) adv();
        }
        return params;
    }

    void skip_to_close_paren() {
        int depth = 1;
        while (!eof()) {
            if (cur().is_punct('(')) ++depth;
            else if (cur().is_punct(')')) {
                --depth;
                if (depth == 0) {
                    adv();
                    return;
                }
            }
            adv();
        }
    }

    size_t find_matching_brace(size_t open_tok) const {
        int depth = 0;
        for (size_t i = open_tok; i < toks_.size(); ++i) {
            if (toks_[i].is_punct('{')) ++depth;
            else if (toks_[i].is_punct('}')) {
                --depth;
                if (depth == 0) return i;
            }
        }
        return toks_.size() - 1;
    }

    void scan_pending_bodies(TypeDecl& td, const std::vector<PendingBody>& bodies) {
        for (const PendingBody& b : bodies) {
            scan_body(td.methods[b.method_index], td, b.open_tok, b.close_tok);
        }
    }

    // --- method body fact extraction ---------------------------------------

    struct BodyScope {
        enum class Kind { plain, loop, do_loop, sync } kind;
        enum class Mode { header, awaiting, block, stmt, do_tail_await, do_tail } mode;
        int paren_base = 0;
        bool header_started = false;
        int brace_level = 0;
        size_t start_tok = 0;  // keyword token, for synchronized spans
    };

    struct PendingGroup {
        bool is_alloc = false;
        size_t start_tok = 0;  // 'new' keyword or receiver-chain start
        std::string name;      // constructed type or callee name
        std::string hint;      // receiver type hint (calls only)
        std::optional<SourceSpan> hint_decl_span;
        int open_depth = 0;    // paren depth of the argument list
        int commas = 0;
        bool any_arg = false;
        int loop_depth = 0;
    };

    struct VarInfo {
        std::string type;
        std::optional<SourceSpan> type_decl_span;
    };

    void scan_body(MethodDecl& md, const TypeDecl& td, size_t body_open, size_t body_close) {
        MethodFacts& facts = md.facts;
        std::map<std::string, VarInfo> locals;
        for (const Param& p : md.parameters) {
            if (!p.name.empty()) locals[p.name] = {p.type, md.span};
        }
        std::map<std::string, VarInfo> field_types;
        for (const FieldDecl& f : td.fields) {
            field_types[f.name] = {f.declared_type, f.type_token_span};
        }

        std::vector<BodyScope> scopes;
        std::vector<PendingGroup> pendings;
        int paren_depth = 0;
        int brace_depth = 0;
        bool at_stmt_start = true;

        auto loop_depth_now = [&]() {
            int d = 0;
            for (const BodyScope& s : scopes) {
                if (s.kind == BodyScope::Kind::loop || s.kind == BodyScope::Kind::do_loop) ++d;
            }
            return d;
        };

        auto push_loop = [&](BodyScope::Kind kind, BodyScope::Mode mode, size_t start) {
            BodyScope s;
            s.kind = kind;
            s.mode = mode;
            s.paren_base = paren_depth;
            s.start_tok = start;
            scopes.push_back(s);
            ++facts.loop_count;
            facts.max_loop_depth = std::max(facts.max_loop_depth, loop_depth_now());
        };

        // Pops single-statement scopes whose statement just ended at token t.
        auto cascade = [&](size_t t) {
            while (!scopes.empty() && scopes.back().mode == BodyScope::Mode::stmt) {
                if (tok(t + 1).is_ident("else")) break;
                if (scopes.back().kind == BodyScope::Kind::do_loop) {
                    scopes.back().mode = BodyScope::Mode::do_tail_await;
                    break;
                }
                scopes.pop_back();
            }
        };

        auto resolve_var = [&](const std::string& ident, size_t ident_tok) -> VarInfo {
            auto lit = locals.find(ident);
            if (lit != locals.end()) return lit->second;
            auto fit = field_types.find(ident);
            if (fit != field_types.end()) return fit->second;
            if (!ident.empty() && std::isupper(static_cast<unsigned char>(ident[0]))) {
                return {ident, token_span(path_, toks_[ident_tok])};
            }
            return {};
        };

        // First token of the receiver chain for a call whose callee sits at
        // token t ("a.b.m" starts at "a"; unqualified calls start at "m").
        auto call_start_tok = [&](size_t t) -> size_t {
            size_t s = t;
            while (s >= 2 && toks_[s - 1].is_punct('.') &&
                   toks_[s - 2].kind == TokenKind::identifier) {
                s -= 2;
            }
            return s;
        };

        // Receiver hint for a call whose callee identifier sits at token t.
        auto receiver_hint = [&](size_t t) -> VarInfo {
            if (t == 0 || !toks_[t - 1].is_punct('.')) return {td.name, std::nullopt};
            if (t < 2) return {};
            const Token& before = toks_[t - 2];
            bool chained = t >= 3 && toks_[t - 3].is_punct('.');
            if (before.is_ident("this") && !chained) return {td.name, std::nullopt};
            if (before.is_ident("super") && !chained) {
                if (td.supertypes.empty()) return {};
                return {simple_type_name(td.supertypes[0]), std::nullopt};
            }
            if (before.kind != TokenKind::identifier) return {};
            if (chained) {
                if (std::isupper(static_cast<unsigned char>(before.text[0]))) {
                    return {before.text, token_span(path_, before)};
                }
                return {};
            }
            return resolve_var(before.text, t - 2);
        };

        // Best-effort local variable declaration: [final] Type name (=|;|:|,)
        auto try_local_decl = [&](size_t t) {
            size_t k = t;
            if (tok(k).is_ident("final")) ++k;
            if (tok(k).kind != TokenKind::identifier) return;
            if (stmt_keywords().count(tok(k).text) && tok(k).text != "var") return;
            std::string type = tok(k).text;
            ++k;
            while (tok(k).is_punct('.') && tok(k + 1).kind == TokenKind::identifier) {
                type += '.';
                type += tok(k + 1).text;
                k += 2;
            }
            if (tok(k).is_punct('<')) {
                int depth = 0;
                size_t j = k;
                while (j < toks_.size()) {
                    if (toks_[j].is_punct('<')) ++depth;
                    else if (toks_[j].is_punct('>')) {
                        --depth;
                        if (depth == 0) {
                            ++j;
                            break;
                        }
                    } else if (toks_[j].is_punct(';') || toks_[j].is_punct('{') ||
                               toks_[j].is_punct(')') || toks_[j].kind == TokenKind::eof) {
                        return;  // comparison, not generics
                    }
                    ++j;
                }
                k = j;
            }
            while (tok(k).is_punct('[') && tok(k + 1).is_punct(']')) {
                type += "[]";
                k += 2;
            }
            if (tok(k).kind != TokenKind::identifier) return;
            if (stmt_keywords().count(tok(k).text)) return;
            std::string name = tok(k).text;
            ++k;
            if (tok(k).is_punct('=') || tok(k).is_punct(';') || tok(k).is_punct(':') ||
                tok(k).is_punct(',')) {
                size_t type_tok = tok(t).is_ident("final") ? t + 1 : t;
                locals[name] = {type, token_span(path_, tok(type_tok))};
            }
        };

        for (size_t t = body_open + 1; t < body_close; ++t) {
            const Token& token = toks_[t];
            bool started_statement = at_stmt_start;
            at_stmt_start = false;

            // A `do` body not followed by `while` simply ends the loop.
            if (!scopes.empty() && scopes.back().mode == BodyScope::Mode::do_tail_await &&
                !token.is_ident("while")) {
                scopes.pop_back();
                cascade(t - 1);
            }

            if (!scopes.empty() && scopes.back().mode == BodyScope::Mode::awaiting) {
                if (token.is_punct('{')) {
                    scopes.back().mode = BodyScope::Mode::block;
                    scopes.back().brace_level = brace_depth;
                    ++brace_depth;
                    at_stmt_start = true;
                    continue;
                }
                scopes.back().mode = BodyScope::Mode::stmt;
                started_statement = true;
            }

            // Argument presence for the innermost open call/alloc.
            if (!pendings.empty() && paren_depth >= pendings.back().open_depth &&
                !(token.is_punct(')') && paren_depth == pendings.back().open_depth)) {
                pendings.back().any_arg = true;
            }

            if (token.is_punct('(')) {
                ++paren_depth;
                if (!scopes.empty() &&
                    (scopes.back().mode == BodyScope::Mode::header ||
                     scopes.back().mode == BodyScope::Mode::do_tail) &&
                    !scopes.back().header_started) {
                    scopes.back().header_started = true;
                    if (scopes.back().kind == BodyScope::Kind::loop) at_stmt_start = true;
                }
                continue;
            }

            if (token.is_punct(')')) {
                --paren_depth;
                if (!pendings.empty() && pendings.back().open_depth == paren_depth + 1) {
                    PendingGroup g = pendings.back();
                    pendings.pop_back();
                    int argc = g.any_arg ? g.commas + 1 : 0;
                    SourceSpan span = span_between(path_, tok(g.start_tok), token);
                    if (g.is_alloc) {
                        facts.allocations.push_back({g.name, g.loop_depth, span});
                        if (tok(t + 1).is_punct('{')) {
                            diag(Severity::warning, tok(t + 1), "anon-class-skipped",
                                 "anonymous class body treated as opaque");
                            t = skip_brace_tokens(t + 1, body_close);
                            at_stmt_start = true;
                            continue;
                        }
                    } else {
                        facts.calls.push_back(
                            {g.name, g.hint, argc, g.loop_depth, span, g.hint_decl_span});
                    }
                }
                if (!scopes.empty() && scopes.back().header_started &&
                    paren_depth == scopes.back().paren_base) {
                    if (scopes.back().mode == BodyScope::Mode::header) {
                        scopes.back().mode = BodyScope::Mode::awaiting;
                    } else if (scopes.back().mode == BodyScope::Mode::do_tail) {
                        scopes.pop_back();
                        cascade(t);
                    }
                }
                continue;
            }

            if (token.is_punct('{')) {
                BodyScope s;
                s.kind = BodyScope::Kind::plain;
                s.mode = BodyScope::Mode::block;
                s.brace_level = brace_depth;
                scopes.push_back(s);
                ++brace_depth;
                at_stmt_start = true;
                continue;
            }

            if (token.is_punct('}')) {
                --brace_depth;
                // Close the innermost block scope at this level.
                while (!scopes.empty()) {
                    BodyScope top = scopes.back();
                    if (top.mode != BodyScope::Mode::block) {
                        scopes.pop_back();  // abandoned stmt/header scope
                        continue;
                    }
                    if (top.kind == BodyScope::Kind::do_loop) {
                        scopes.back().mode = BodyScope::Mode::do_tail_await;
                    } else {
                        scopes.pop_back();
                        if (top.kind == BodyScope::Kind::sync) {
                            facts.sync_blocks.push_back(
                                span_between(path_, tok(top.start_tok), token));
                        }
                        cascade(t);
                    }
                    break;
                }
                at_stmt_start = true;
                continue;
            }

            if (token.is_punct(';')) {
                if (paren_depth == 0) {
                    cascade(t);
                    at_stmt_start = true;
                } else if (!scopes.empty() &&
                           scopes.back().mode == BodyScope::Mode::header) {
                    at_stmt_start = true;  // next clause of a for-header
                }
                continue;
            }

            if (token.is_punct(',')) {
                if (!pendings.empty() && pendings.back().open_depth == paren_depth) {
                    ++pendings.back().commas;
                }
                continue;
            }

            if (token.kind != TokenKind::identifier) continue;

            const std::string& word = token.text;
            if (word == "for") {
                push_loop(BodyScope::Kind::loop, BodyScope::Mode::header, t);
                continue;
            }
            if (word == "while") {
                if (!scopes.empty() && scopes.back().mode == BodyScope::Mode::do_tail_await) {
                    scopes.back().mode = BodyScope::Mode::do_tail;
                    scopes.back().header_started = false;
                    scopes.back().paren_base = paren_depth;
                } else {
                    push_loop(BodyScope::Kind::loop, BodyScope::Mode::header, t);
                }
                continue;
            }
            if (word == "do") {
                push_loop(BodyScope::Kind::do_loop, BodyScope::Mode::awaiting, t);
                continue;
            }
            if (word == "synchronized") {
                if (tok(t + 1).is_punct('(')) {
                    BodyScope s;
                    s.kind = BodyScope::Kind::sync;
                    s.mode = BodyScope::Mode::header;
                    s.paren_base = paren_depth;
                    s.start_tok = t;
                    scopes.push_back(s);
                }
                continue;
            }
            if (word == "if" || word == "switch") {
                ++facts.branch_count;
                continue;
            }
            if (word == "catch") {
                // catch (ExType name)
                if (tok(t + 1).is_punct('(') && tok(t + 2).kind == TokenKind::identifier &&
                    tok(t + 3).kind == TokenKind::identifier && tok(t + 4).is_punct(')')) {
                    locals[tok(t + 3).text] = {tok(t + 2).text, token_span(path_, tok(t + 2))};
                }
                continue;
            }
            if (word == "new") {
                size_t k = t + 1;
                if (tok(k).kind != TokenKind::identifier) continue;
                std::string type = tok(k).text;
                ++k;
                while (tok(k).is_punct('.') && tok(k + 1).kind == TokenKind::identifier) {
                    type += '.';
                    type += tok(k + 1).text;
                    k += 2;
                }
                if (tok(k).is_punct('<')) {
                    int depth = 0;
                    size_t j = k;
                    bool ok = false;
                    while (j < toks_.size()) {
                        if (toks_[j].is_punct('<')) ++depth;
                        else if (toks_[j].is_punct('>')) {
                            --depth;
                            if (depth == 0) {
                                ++j;
                                ok = true;
                                break;
                            }
                        } else if (toks_[j].is_punct(';') || toks_[j].is_punct('{') ||
                                   toks_[j].kind == TokenKind::eof) {
                            break;
                        }
                        ++j;
                    }
                    if (ok) k = j;
                }
                if (tok(k).is_punct('(')) {
                    PendingGroup g;
                    g.is_alloc = true;
                    g.start_tok = t;
                    g.name = type;
                    g.open_depth = paren_depth + 1;
                    g.loop_depth = loop_depth_now();
                    pendings.push_back(g);
                    t = k - 1;  // the '(' is processed next iteration
                } else if (tok(k).is_punct('[')) {
                    facts.allocations.push_back(
                        {type + "[]", loop_depth_now(), span_between(path_, token, tok(k - 1))});
                    t = k - 1;
                } else {
                    facts.allocations.push_back(
                        {type, loop_depth_now(), span_between(path_, token, tok(k - 1))});
                    t = k - 1;
                }
                continue;
            }
            if (word == "final") {
                if (started_statement) try_local_decl(t);
                continue;
            }
            if (stmt_keywords().count(word)) continue;

            if (started_statement) try_local_decl(t);

            if (tok(t + 1).is_punct('(')) {
                PendingGroup g;
                g.is_alloc = false;
                g.start_tok = call_start_tok(t);
                g.name = word;
                VarInfo hint = receiver_hint(t);
                g.hint = hint.type;
                g.hint_decl_span = hint.type_decl_span;
                g.open_depth = paren_depth + 1;
                g.loop_depth = loop_depth_now();
                pendings.push_back(g);
            }
        }
    }

    // Skips an opaque '{...}' given the token index of '{'; returns the
    // index of the matching '}'.
    size_t skip_brace_tokens(size_t open_tok, size_t limit) const {
        int depth = 0;
        for (size_t i = open_tok; i < std::min(limit + 1, toks_.size()); ++i) {
            if (toks_[i].is_punct('{')) ++depth;
            else if (toks_[i].is_punct('}')) {
                --depth;
                if (depth == 0) return i;
            }
        }
        return limit;
    }
};

}  // namespace

ParsedUnit parse_unit(const std::string& source_text, const std::string& path) {
    if (!is_valid_utf8(source_text)) {
        throw Error(ErrorCode::unreadable_source, path + " is not valid UTF-8");
    }
    UnitParser parser(source_text, path);
    return parser.run();
}

CodeModel parse_repository(const std::string& root, const RepoConfig& config) {
    CodeModel model;
    std::vector<std::string> all = list_files_recursive(root);
    std::vector<std::string> matched;
    for (const std::string& rel : all) {
        if (!matches_any(config.source_globs, rel)) continue;
        if (matches_any(config.exclude_globs, rel)) continue;
        matched.push_back(rel);
    }
    if (matched.empty()) {
        throw Error(ErrorCode::no_sources_found, "no source files matched under " + root);
    }

    std::set<std::string> seen_types;
    for (const std::string& rel : matched) {
        auto content = read_file(join_path(root, rel));
        if (!content) {
            model.diagnostics.push_back({Severity::error, rel, 0, 0, "unreadable-source",
                                         "file could not be read"});
            continue;
        }
        try {
            ParsedUnit parsed = parse_unit(*content, rel);
            for (auto it = parsed.unit.types.begin(); it != parsed.unit.types.end();) {
                if (!seen_types.insert(it->qualified_name).second) {
                    model.diagnostics.push_back({Severity::warning, rel, it->span.start_line,
                                                 it->span.start_col, "duplicate-type",
                                                 "duplicate declaration of " + it->qualified_name +
                                                     " dropped"});
                    it = parsed.unit.types.erase(it);
                } else {
                    ++it;
                }
            }
            model.units.push_back(std::move(parsed.unit));
            model.sources[rel] = std::move(*content);
            model.diagnostics.insert(model.diagnostics.end(), parsed.diagnostics.begin(),
                                     parsed.diagnostics.end());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::unreadable_source) throw;
            model.diagnostics.push_back({Severity::error, rel, 0, 0, "unreadable-source",
                                         e.what()});
        }
    }

    std::vector<std::pair<std::string, std::string>> for_hash;
    for_hash.reserve(model.sources.size());
    for (const auto& [path, content] : model.sources) for_hash.emplace_back(path, content);
    model.fingerprint = fingerprint_sources(for_hash);
    model.finalize();
    return model;
}

CodeModel reparse_file(const CodeModel& model, const std::string& path,
                       const std::string& new_content) {
    CodeModel next;
    next.diagnostics = {};
    for (const SourceUnit& u : model.units) {
        if (u.span.path == path) continue;
        next.units.push_back(u);
    }
    next.sources = model.sources;
    next.sources[path] = new_content;

    ParsedUnit parsed = parse_unit(new_content, path);
    next.units.push_back(std::move(parsed.unit));
    next.diagnostics = parsed.diagnostics;
    std::sort(next.units.begin(), next.units.end(),
              [](const SourceUnit& a, const SourceUnit& b) { return a.span.path < b.span.path; });

    std::vector<std::pair<std::string, std::string>> for_hash;
    for (const auto& [p, content] : next.sources) for_hash.emplace_back(p, content);
    next.fingerprint = fingerprint_sources(for_hash);
    next.finalize();
    return next;
}

}  // namespace sysopt
