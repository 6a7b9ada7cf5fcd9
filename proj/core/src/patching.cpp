#include "sysopt/patching.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "sysopt/behavior.hpp"
#include "sysopt/component_graph.hpp"
#include "sysopt/diff.hpp"
#include "sysopt/error.hpp"
#include "sysopt/fs.hpp"
#include "sysopt/lexer.hpp"
#include "sysopt/parser.hpp"

namespace sysopt {

const char* to_string(PatchStatus status) {
    switch (status) {
        case PatchStatus::proposed: return "proposed";
        case PatchStatus::applied: return "applied";
        case PatchStatus::rejected_tests: return "rejected_tests";
        case PatchStatus::rejected_breaking: return "rejected_breaking";
        case PatchStatus::rejected_conflict: return "rejected_conflict";
    }
    return "proposed";
}

namespace {

// --- text edits over (line, col) coordinates -----------------------------

struct TextEdit {
    int line = 0;  // 1-based start
    int col = 0;
    int end_line = 0;  // inclusive end; 0 with end_col 0 means pure insertion
    int end_col = 0;
    std::string replacement;
};

std::vector<std::string> to_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) lines.push_back(current);
    return lines;
}

std::string apply_edits(const std::string& text, std::vector<TextEdit> edits) {
    std::vector<std::string> lines = to_lines(text);
    bool final_newline = text.empty() || text.back() == '\n';
    // Bottom-up so earlier coordinates stay valid.
    std::sort(edits.begin(), edits.end(), [](const TextEdit& a, const TextEdit& b) {
        if (a.line != b.line) return a.line > b.line;
        return a.col > b.col;
    });
    for (const TextEdit& e : edits) {
        size_t li = static_cast<size_t>(e.line - 1);
        if (li >= lines.size()) continue;
        if (e.end_line == 0) {  // insertion before (line, col)
            std::string& line = lines[li];
            int col = std::min<int>(e.col, static_cast<int>(line.size()) + 1);
            line = line.substr(0, static_cast<size_t>(col - 1)) + e.replacement +
                   line.substr(static_cast<size_t>(col - 1));
            continue;
        }
        size_t le = static_cast<size_t>(e.end_line - 1);
        if (le >= lines.size()) continue;
        std::string head = lines[li].substr(
            0, std::min<size_t>(static_cast<size_t>(e.col - 1), lines[li].size()));
        std::string tail;
        if (static_cast<size_t>(e.end_col) < lines[le].size()) {
            tail = lines[le].substr(static_cast<size_t>(e.end_col));
        }
        lines[li] = head + e.replacement + tail;
        if (le > li) lines.erase(lines.begin() + static_cast<long>(li) + 1,
                                 lines.begin() + static_cast<long>(le) + 1);
    }
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 < lines.size() || final_newline) out.push_back('\n');
    }
    return out;
}

std::string normalize_ws(const std::string& s) {
    std::string out;
    bool in_ws = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

struct OwnerContext {
    const SourceUnit* unit = nullptr;
    const TypeDecl* type = nullptr;
    const MethodDecl* method = nullptr;
    std::string path;
    const std::string* source = nullptr;
};

std::string strip_prefix(const std::string& id, const char* prefix) {
    std::string p(prefix);
    return id.rfind(p, 0) == 0 ? id.substr(p.size()) : id;
}

OwnerContext locate_owner(const Finding& finding, const CodeModel& model) {
    OwnerContext ctx;
    std::string sig = strip_prefix(finding.owner_method_id, "method:");
    ctx.method = model.find_method(sig);
    ctx.type = model.owner_of_method(sig);
    if (!ctx.type && !finding.owner_class_id.empty()) {
        ctx.type = model.find_type(strip_prefix(finding.owner_class_id, "class:"));
    }
    if (ctx.type) {
        ctx.unit = model.unit_of_type(ctx.type->qualified_name);
        if (ctx.unit) {
            ctx.path = ctx.unit->span.path;
            auto it = model.sources.find(ctx.path);
            if (it != model.sources.end()) ctx.source = &it->second;
        }
    }
    return ctx;
}

// Indentation of the first member line inside the class; falls back to
// four spaces relative to the class declaration.
std::string member_indent(const std::vector<std::string>& lines, const TypeDecl& type) {
    int first_member_line = 0;
    for (const FieldDecl& f : type.fields) {
        if (first_member_line == 0 || f.span.start_line < first_member_line) {
            first_member_line = f.span.start_line;
        }
    }
    for (const MethodDecl& m : type.methods) {
        if (first_member_line == 0 || m.span.start_line < first_member_line) {
            first_member_line = m.span.start_line;
        }
    }
    if (first_member_line > 0 && first_member_line <= static_cast<int>(lines.size())) {
        const std::string& line = lines[static_cast<size_t>(first_member_line - 1)];
        size_t n = line.find_first_not_of(" \t");
        if (n != std::string::npos && n > 0) return line.substr(0, n);
    }
    if (type.span.start_line <= static_cast<int>(lines.size())) {
        const std::string& line = lines[static_cast<size_t>(type.span.start_line - 1)];
        size_t n = line.find_first_not_of(" \t");
        std::string base = n == std::string::npos ? "" : line.substr(0, n);
        return base + "    ";
    }
    return "    ";
}

struct AllocSite {
    const MethodDecl* method = nullptr;
    const AllocFact* alloc = nullptr;
    std::string raw_type;  // type text as written at the site
    std::string arg_text;  // normalized constructor arguments
};

// All allocation sites of `simple_type` across the class.
std::vector<AllocSite> collect_alloc_sites(const TypeDecl& type, const std::string& simple_type,
                                           const std::string& source) {
    std::vector<AllocSite> sites;
    for (const MethodDecl& m : type.methods) {
        for (const AllocFact& a : m.facts.allocations) {
            if (a.constructed_type.find("[]") != std::string::npos) continue;
            if (simple_type_name(a.constructed_type) != simple_type) continue;
            AllocSite site;
            site.method = &m;
            site.alloc = &a;
            std::string text = slice_span(source, a.span);
            size_t open = text.find('(');
            size_t close = text.rfind(')');
            std::string raw = text.substr(3, (open == std::string::npos ? text.size() : open) - 3);
            site.raw_type = normalize_ws(raw);
            if (open != std::string::npos && close != std::string::npos && close > open) {
                site.arg_text = normalize_ws(text.substr(open + 1, close - open - 1));
            }
            sites.push_back(std::move(site));
        }
    }
    std::sort(sites.begin(), sites.end(), [](const AllocSite& a, const AllocSite& b) {
        return std::tie(a.alloc->span.start_line, a.alloc->span.start_col) <
               std::tie(b.alloc->span.start_line, b.alloc->span.start_col);
    });
    return sites;
}

bool has_field_named(const TypeDecl& type, const std::string& name) {
    for (const FieldDecl& f : type.fields) {
        if (f.name == name) return true;
    }
    return false;
}

// Constructor arguments survive hoisting to a static field only when they
// are constants: literals, true/false/null, or references that resolve to
// static final fields (by name) or other types (uppercase by convention).
// Lowercase identifiers are parameters or locals and disqualify the site.
bool args_are_constant(const std::string& arg_text, const TypeDecl& type) {
    LexResult lexed = lex_source(arg_text, "<args>");
    for (const Token& t : lexed.tokens) {
        if (t.kind != TokenKind::identifier) continue;
        if (t.is_ident("true") || t.is_ident("false") || t.is_ident("null")) continue;
        bool static_final = false;
        for (const FieldDecl& f : type.fields) {
            if (f.name == t.text && f.is_static && f.is_final) {
                static_final = true;
                break;
            }
        }
        if (static_final) continue;
        if (!t.text.empty() && std::isupper(static_cast<unsigned char>(t.text[0]))) continue;
        return false;
    }
    return true;
}

Patch finish_patch(const Finding& finding, const OwnerContext& ctx,
                   std::vector<TextEdit> edits) {
    std::string new_text = apply_edits(*ctx.source, std::move(edits));
    Patch patch;
    patch.finding_id = finding.id;
    patch.rule_id = finding.rule_id;
    patch.target_path = ctx.path;
    patch.diff = make_unified_diff(ctx.path, *ctx.source, new_text);
    patch.justification = finding.suggestion + "\n" + finding.interpretation;
    return patch;
}

// R1/R3: hoist per-call allocations of a shared-safe type into a
// class-level static final field and read the field at each site.
Patch generate_shared_field_patch(const Finding& finding, const CodeModel& model,
                                  const char* base_name, bool allow_protocol_pair) {
    OwnerContext ctx = locate_owner(finding, model);
    if (!ctx.type || !ctx.source) {
        throw Error(ErrorCode::not_applicable, "owner class not found for " + finding.id);
    }
    if (ctx.type->span.end_line == ctx.type->body_open_line) {
        throw Error(ErrorCode::not_applicable, "single-line class body");
    }

    std::vector<AllocSite> sites =
        collect_alloc_sites(*ctx.type, finding.matched_type, *ctx.source);
    if (sites.empty()) {
        throw Error(ErrorCode::not_applicable, "no allocation sites left for " + finding.id);
    }

    // Group sites by exact constructor-argument text.
    std::vector<std::string> arg_variants;
    for (const AllocSite& s : sites) {
        if (!args_are_constant(s.arg_text, *ctx.type)) {
            throw Error(ErrorCode::not_applicable,
                        "constructor arguments reference per-call state: " + s.arg_text);
        }
        if (std::find(arg_variants.begin(), arg_variants.end(), s.arg_text) ==
            arg_variants.end()) {
            arg_variants.push_back(s.arg_text);
        }
    }

    std::map<std::string, std::string> field_for_args;  // arg text -> field name
    if (arg_variants.size() == 1) {
        field_for_args[arg_variants[0]] = base_name;
    } else if (arg_variants.size() == 2 && allow_protocol_pair) {
        auto is_http = [](const std::string& s) {
            return s.find("http://") != std::string::npos &&
                   s.find("https://") == std::string::npos;
        };
        auto is_https = [](const std::string& s) {
            return s.find("https://") != std::string::npos;
        };
        if (is_http(arg_variants[0]) && is_https(arg_variants[1])) {
            field_for_args[arg_variants[0]] = std::string(base_name) + "_HTTP";
            field_for_args[arg_variants[1]] = std::string(base_name) + "_HTTPS";
        } else if (is_https(arg_variants[0]) && is_http(arg_variants[1])) {
            field_for_args[arg_variants[0]] = std::string(base_name) + "_HTTPS";
            field_for_args[arg_variants[1]] = std::string(base_name) + "_HTTP";
        } else {
            throw Error(ErrorCode::not_applicable,
                        "constructor argument variants are not a protocol pair");
        }
    } else {
        throw Error(ErrorCode::not_applicable,
                    "allocation sites use distinct constructor arguments");
    }

    for (const auto& [args, name] : field_for_args) {
        if (has_field_named(*ctx.type, name)) {
            throw Error(ErrorCode::not_applicable, "field " + name + " already exists");
        }
    }

    std::vector<std::string> lines = to_lines(*ctx.source);
    std::string indent = member_indent(lines, *ctx.type);
    std::string insertion;
    for (const std::string& args : arg_variants) {
        insertion += indent + "private static final " + sites[0].raw_type + " " +
                     field_for_args[args] + " = new " + sites[0].raw_type + "(" + args + ");\n";
    }

    std::vector<TextEdit> edits;
    // Insert right below the class's opening brace line.
    TextEdit insert;
    insert.line = ctx.type->body_open_line + 1;
    insert.col = 1;
    insert.end_line = 0;
    insert.end_col = 0;
    insert.replacement = insertion;
    if (ctx.type->body_open_line >= static_cast<int>(lines.size())) {
        throw Error(ErrorCode::not_applicable, "class body ends at end of file");
    }
    edits.push_back(insert);

    for (const AllocSite& s : sites) {
        TextEdit e;
        e.line = s.alloc->span.start_line;
        e.col = s.alloc->span.start_col;
        e.end_line = s.alloc->span.end_line;
        e.end_col = s.alloc->span.end_col;
        e.replacement = field_for_args[s.arg_text];
        edits.push_back(e);
    }
    return finish_patch(finding, ctx, std::move(edits));
}

// --- R2 safety predicate ---------------------------------------------------

const std::set<std::string>& primitive_types() {
    static const std::set<std::string> p = {"boolean", "int", "long", "short",
                                            "byte", "char", "float", "double"};
    return p;
}

struct FlagBodyCheck {
    bool ok = false;
    std::string reason;
    // Every primitive field the body writes or reads; all of them must end
    // up volatile for the lock removal to preserve visibility.
    std::vector<std::string> touched_fields;
};

// The body must consist solely of `[this.]field = expr;` assignments to
// primitive fields (expr built from parameters and literals only) and
// `return expr;` reads of primitive fields/parameters. Anything else makes
// volatile an unsound replacement for the lock.
FlagBodyCheck check_flag_style_body(const MethodDecl& method, const TypeDecl& type,
                                    const std::string& source) {
    FlagBodyCheck check;
    const MethodFacts& facts = method.facts;
    if (!facts.calls.empty() || !facts.allocations.empty() || !facts.sync_blocks.empty() ||
        facts.loop_count != 0 || facts.branch_count != 0) {
        check.reason = "body is not a plain flag update";
        return check;
    }
    if (!method.body_span) {
        check.reason = "method has no body";
        return check;
    }

    std::map<std::string, std::string> field_type;
    for (const FieldDecl& f : type.fields) field_type[f.name] = f.declared_type;
    std::set<std::string> params;
    for (const Param& p : method.parameters) params.insert(p.name);

    std::string body = slice_span(source, *method.body_span);
    LexResult lexed = lex_source(body, "<body>");
    std::vector<Token>& toks = lexed.tokens;
    // Drop the outer braces.
    size_t begin = 0, end = toks.size();
    while (begin < toks.size() && !toks[begin].is_punct('{')) ++begin;
    ++begin;
    while (end > 0 && toks[end - 1].kind == TokenKind::eof) --end;
    while (end > begin && !toks[end - 1].is_punct('}')) --end;
    if (end > 0) --end;

    auto touch = [&](const std::string& name) {
        if (std::find(check.touched_fields.begin(), check.touched_fields.end(), name) ==
            check.touched_fields.end()) {
            check.touched_fields.push_back(name);
        }
    };
    auto is_literal = [](const Token& t) {
        return t.kind == TokenKind::number || t.is_ident("true") || t.is_ident("false");
    };
    auto expr_ok = [&](size_t from, size_t to, bool allow_field_reads) {
        for (size_t i = from; i < to; ++i) {
            const Token& t = toks[i];
            if (t.kind == TokenKind::identifier) {
                if (is_literal(t) || t.is_ident("this")) continue;
                if (params.count(t.text)) continue;
                if (allow_field_reads) {
                    auto it = field_type.find(t.text);
                    if (it != field_type.end() && primitive_types().count(it->second)) {
                        touch(t.text);
                        continue;
                    }
                }
                return false;
            }
            if (t.kind == TokenKind::number) continue;
            if (t.kind == TokenKind::punct) {
                static const std::string allowed = "+-*/%!&|^<>=()?:.";
                if (t.text.size() == 1 && allowed.find(t.text[0]) != std::string::npos) continue;
                return false;
            }
            return false;  // strings, chars
        }
        return true;
    };

    size_t i = begin;
    while (i < end) {
        if (toks[i].is_punct(';')) {
            ++i;
            continue;
        }
        // return expr ;
        if (toks[i].is_ident("return")) {
            size_t j = i + 1;
            while (j < end && !toks[j].is_punct(';')) ++j;
            if (j >= end || !expr_ok(i + 1, j, true)) {
                check.reason = "return expression reads more than flag state";
                return check;
            }
            i = j + 1;
            continue;
        }
        // [this.] field = expr ;
        size_t j = i;
        if (toks[j].is_ident("this") && j + 1 < end && toks[j + 1].is_punct('.')) j += 2;
        if (j >= end || toks[j].kind != TokenKind::identifier) {
            check.reason = "statement is not a flag assignment";
            return check;
        }
        std::string target = toks[j].text;
        if (j + 1 >= end || !toks[j + 1].is_punct('=') ||
            (j + 2 < end && toks[j + 2].is_punct('='))) {
            check.reason = "statement is not a simple assignment";
            return check;
        }
        auto ft = field_type.find(target);
        if (ft == field_type.end() || !primitive_types().count(ft->second)) {
            check.reason = "assignment target is not a primitive field";
            return check;
        }
        size_t k = j + 2;
        size_t stmt_end = k;
        while (stmt_end < end && !toks[stmt_end].is_punct(';')) ++stmt_end;
        if (stmt_end >= end || !expr_ok(k, stmt_end, false)) {
            check.reason = "assignment value depends on more than parameters and literals";
            return check;
        }
        touch(target);
        i = stmt_end + 1;
    }

    check.ok = true;
    return check;
}

Patch generate_volatile_flag_patch(const Finding& finding, const CodeModel& model) {
    if (finding.sync_form == "synchronized_block") {
        throw Error(ErrorCode::not_applicable,
                    "block-level synchronization has no flag transformation");
    }
    OwnerContext ctx = locate_owner(finding, model);
    if (!ctx.type || !ctx.method || !ctx.source) {
        throw Error(ErrorCode::not_applicable, "owner method not found for " + finding.id);
    }
    if (!ctx.method->is_synchronized || !ctx.method->sync_keyword_span) {
        throw Error(ErrorCode::not_applicable, "method is not a synchronized method");
    }

    FlagBodyCheck check = check_flag_style_body(*ctx.method, *ctx.type, *ctx.source);
    if (!check.ok) throw Error(ErrorCode::not_applicable, check.reason);

    std::vector<TextEdit> edits;
    // Remove the `synchronized ` modifier.
    const SourceSpan& kw = *ctx.method->sync_keyword_span;
    TextEdit remove;
    remove.line = kw.start_line;
    remove.col = kw.start_col;
    remove.end_line = kw.end_line;
    remove.end_col = kw.end_col;
    std::vector<std::string> lines = to_lines(*ctx.source);
    if (kw.end_line <= static_cast<int>(lines.size())) {
        const std::string& line = lines[static_cast<size_t>(kw.end_line - 1)];
        if (static_cast<size_t>(kw.end_col) < line.size() &&
            line[static_cast<size_t>(kw.end_col)] == ' ') {
            ++remove.end_col;  // take the following space with the keyword
        }
    }
    remove.replacement = "";
    edits.push_back(remove);

    for (const std::string& name : check.touched_fields) {
        for (const FieldDecl& f : ctx.type->fields) {
            if (f.name != name || f.is_volatile) continue;
            TextEdit ins;
            ins.line = f.type_token_span.start_line;
            ins.col = f.type_token_span.start_col;
            ins.end_line = 0;
            ins.end_col = 0;
            ins.replacement = "volatile ";
            edits.push_back(ins);
            break;
        }
    }
    return finish_patch(finding, ctx, std::move(edits));
}

}  // namespace

Patch generate_patch(const Finding& finding, const CodeModel& model,
                     const std::string& workspace_root) {
    if (!workspace_root.empty() && !finding.evidence.empty()) {
        const std::string& path = finding.evidence.front().path;
        auto disk = read_file(join_path(workspace_root, path));
        auto it = model.sources.find(path);
        if (it == model.sources.end() || !disk || *disk != it->second) {
            throw Error(ErrorCode::stale_evidence,
                        path + " changed since the analysis was produced");
        }
    }

    if (finding.rule_id == "R1") {
        return generate_shared_field_patch(finding, model, "SHARED_CLIENT", true);
    }
    if (finding.rule_id == "R3") {
        std::string name = "SHARED_" + upper(finding.matched_type);
        return generate_shared_field_patch(finding, model, name.c_str(), false);
    }
    if (finding.rule_id == "R2") {
        return generate_volatile_flag_patch(finding, model);
    }
    throw Error(ErrorCode::not_applicable,
                finding.rule_id + " has no deterministic transformation");
}

GeneratedPatches generate_patchset(const std::vector<Finding>& findings, const CodeModel& model,
                                   int iteration, const std::string& workspace_root) {
    GeneratedPatches out;
    out.set.base_fingerprint = model.fingerprint;
    out.set.iteration = iteration;
    std::set<std::string> covered;  // rule|class|type already patched
    for (const Finding& f : findings) {
        std::string key = f.rule_id + "|" + f.owner_class_id + "|" +
                          (f.rule_id == "R2" ? f.owner_method_id : f.matched_type);
        if (covered.count(key)) {
            out.skipped.push_back({f.id, "covered by an earlier patch for the same class"});
            continue;
        }
        try {
            Patch p = generate_patch(f, model, workspace_root);
            covered.insert(key);
            out.set.patches.push_back(std::move(p));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::not_applicable || e.code() == ErrorCode::stale_evidence) {
                out.skipped.push_back({f.id, e.what()});
                continue;
            }
            throw;
        }
    }
    return out;
}

NonBreakingVerdict verify_non_breaking(const CodeModel& before, const CodeModel& after,
                                       const PatternCatalog& catalog) {
    NonBreakingVerdict verdict;

    auto public_signatures = [](const CodeModel& m) {
        std::multiset<std::string> sigs;
        for (const SourceUnit& u : m.units) {
            for (const TypeDecl& td : u.types) {
                for (const MethodDecl& method : td.methods) {
                    if (method.visibility == Visibility::public_v ||
                        method.visibility == Visibility::protected_v) {
                        sigs.insert(method.signature_key);
                    }
                }
            }
        }
        return sigs;
    };
    if (public_signatures(before) != public_signatures(after)) {
        verdict.reason = "public signature multiset changed";
        return verdict;
    }

    auto endpoint_set = [&](const CodeModel& m) {
        std::set<std::string> eps;
        for (const Endpoint& e : detect_endpoints(m, catalog)) {
            eps.insert(e.component_id + "|" + to_string(e.kind) + "|" + e.http_method + "|" +
                       e.route);
        }
        return eps;
    };
    if (endpoint_set(before) != endpoint_set(after)) {
        verdict.reason = "endpoint set changed";
        return verdict;
    }

    for (const SourceUnit& u : before.units) {
        for (const TypeDecl& td : u.types) {
            const TypeDecl* after_type = after.find_type(td.qualified_name);
            for (const FieldDecl& f : td.fields) {
                if (f.visibility != Visibility::public_v) continue;
                bool found = false;
                if (after_type) {
                    for (const FieldDecl& g : after_type->fields) {
                        if (g.name == f.name && g.declared_type == f.declared_type) {
                            found = true;
                            break;
                        }
                    }
                }
                if (!found) {
                    verdict.reason = "public field " + td.qualified_name + "." + f.name +
                                     " removed or retyped";
                    return verdict;
                }
            }
        }
    }

    verdict.ok = true;
    return verdict;
}

namespace {

int error_diag_count(const std::vector<Diagnostic>& diags, const std::string& path) {
    int n = 0;
    for (const Diagnostic& d : diags) {
        if (d.severity == Severity::error && d.path == path) ++n;
    }
    return n;
}

}  // namespace

ApplyOutcome apply_patchset(const PatchSet& set, const std::string& workspace_root,
                            const CodeModel& current, const PatternCatalog& catalog) {
    if (current.fingerprint != set.base_fingerprint) {
        throw Error(ErrorCode::fingerprint_mismatch,
                    "workspace fingerprint " + current.fingerprint +
                        " does not match patch set base " + set.base_fingerprint);
    }

    ApplyOutcome outcome;
    outcome.model = current;

    for (Patch patch : set.patches) {
        auto src = outcome.model.sources.find(patch.target_path);
        if (src == outcome.model.sources.end()) {
            patch.status = PatchStatus::rejected_conflict;
            patch.status_reason = "target file is not part of the model";
            outcome.rejected.push_back(std::move(patch));
            continue;
        }

        ApplyResultText applied = apply_unified_diff(patch.diff, src->second);
        if (!applied.ok) {
            patch.status = PatchStatus::rejected_conflict;
            patch.status_reason = applied.conflict;
            outcome.rejected.push_back(std::move(patch));
            continue;
        }

        CodeModel next;
        try {
            next = reparse_file(outcome.model, patch.target_path, applied.new_text);
        } catch (const Error&) {
            patch.status = PatchStatus::rejected_breaking;
            patch.status_reason = "ParseFailureAfterPatch: file no longer parses";
            outcome.rejected.push_back(std::move(patch));
            continue;
        }
        int before_errors = error_diag_count(outcome.model.diagnostics, patch.target_path);
        int after_errors = error_diag_count(next.diagnostics, patch.target_path);
        if (after_errors > before_errors) {
            patch.status = PatchStatus::rejected_breaking;
            patch.status_reason = "ParseFailureAfterPatch: patched file has parse errors";
            outcome.rejected.push_back(std::move(patch));
            continue;
        }

        NonBreakingVerdict verdict = verify_non_breaking(outcome.model, next, catalog);
        if (!verdict.ok) {
            patch.status = PatchStatus::rejected_breaking;
            patch.status_reason = verdict.reason;
            outcome.rejected.push_back(std::move(patch));
            continue;
        }

        write_file_atomic(join_path(workspace_root, patch.target_path), applied.new_text);
        outcome.model = std::move(next);
        patch.status = PatchStatus::applied;
        outcome.applied.push_back(std::move(patch));
    }
    return outcome;
}

}  // namespace sysopt
