#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sysopt/span.hpp"

namespace sysopt {

struct AnnotationFact {
    std::string name;  // simple or dotted
    std::vector<std::string> string_arguments;
    SourceSpan span;
};

struct CallFact {
    std::string callee;
    std::string receiver_hint;  // textual type, or empty when unknown
    int arg_count = 0;
    int loop_depth = 0;
    SourceSpan span;
    // Where the receiver's type name is written (field/local declaration,
    // or the receiver token itself for static-style calls). Lets site
    // evidence point at text that actually contains the type name.
    std::optional<SourceSpan> hint_decl_span;
};

struct AllocFact {
    std::string constructed_type;
    int loop_depth = 0;
    SourceSpan span;  // covers the `new` keyword through the constructor call
};

struct MethodFacts {
    std::vector<CallFact> calls;
    std::vector<AllocFact> allocations;
    std::vector<SourceSpan> sync_blocks;
    int loop_count = 0;
    int branch_count = 0;
    int max_loop_depth = 0;
};

enum class Visibility { public_v, protected_v, package_v, private_v };
enum class TypeKind { class_k, interface_k, enum_k };

const char* to_string(Visibility v);
const char* to_string(TypeKind k);

enum class InitializerKind { none, new_expression, other };

struct FieldDecl {
    std::string name;
    std::string declared_type;  // textual, generic arguments stripped
    Visibility visibility = Visibility::package_v;
    bool is_static = false;
    bool is_final = false;
    bool is_volatile = false;
    InitializerKind initializer_kind = InitializerKind::none;
    SourceSpan span;
    SourceSpan type_token_span;  // anchor for modifier insertion
};

struct Param {
    std::string name;
    std::string type;  // textual, generic arguments stripped
};

struct MethodDecl {
    std::string name;
    Visibility visibility = Visibility::package_v;
    bool is_static = false;
    bool is_synchronized = false;  // modifier only; block-level sync lives in facts
    bool is_constructor = false;
    std::vector<Param> parameters;
    std::string return_type;  // empty for constructors
    std::vector<AnnotationFact> annotations;
    MethodFacts facts;
    std::string signature_key;  // qualified_owner#name(paramtypes)
    SourceSpan span;            // first modifier/annotation through body close or ';'
    std::optional<SourceSpan> body_span;
    std::optional<SourceSpan> sync_keyword_span;
};

struct TypeDecl {
    std::string name;
    std::string qualified_name;  // package + enclosing types + name
    TypeKind kind = TypeKind::class_k;
    Visibility visibility = Visibility::package_v;
    std::vector<AnnotationFact> annotations;
    std::vector<FieldDecl> fields;
    std::vector<MethodDecl> methods;
    std::vector<std::string> supertypes;  // textual, unresolved
    SourceSpan span;
    int body_open_line = 0;  // line of the '{' opening the type body
    int body_open_col = 0;
};

struct SourceUnit {
    SourceSpan span;  // whole file
    std::string package_name;
    std::vector<std::string> imports;
    // Nested named types are flattened into this list; their
    // qualified_name carries the enclosing type names.
    std::vector<TypeDecl> types;
};

struct ParsedUnit {
    SourceUnit unit;
    std::vector<Diagnostic> diagnostics;
};

struct RepoConfig {
    std::vector<std::string> source_globs{"**/*.java"};
    std::vector<std::string> exclude_globs;
    std::string service_marker = "pom.xml";
};

class CodeModel {
public:
    std::vector<SourceUnit> units;  // sorted by path
    std::vector<Diagnostic> diagnostics;
    std::map<std::string, std::string> sources;  // path -> file bytes
    std::string fingerprint;

    // Rebuilds the lookup indexes; call after mutating units.
    void finalize();

    const TypeDecl* find_type(const std::string& qualified_name) const;
    std::vector<const TypeDecl*> types_with_simple_name(const std::string& simple) const;
    const MethodDecl* find_method(const std::string& signature_key) const;
    const TypeDecl* owner_of_method(const std::string& signature_key) const;
    const SourceUnit* unit_of_type(const std::string& qualified_name) const;

    // Textual supertype closure within the model, including the type itself.
    std::vector<std::string> supertype_closure(const std::string& qualified_name) const;

    size_t method_count() const;

private:
    std::map<std::string, std::pair<size_t, size_t>> type_index_;  // qualified -> (unit, type)
    std::multimap<std::string, std::pair<size_t, size_t>> simple_index_;
    std::map<std::string, std::pair<size_t, size_t>> method_owner_;  // sig -> (unit, type)
    std::map<std::string, const MethodDecl*> method_index_;
};

// Last dotted segment, with generic arguments and array suffix removed.
std::string simple_type_name(const std::string& type_text);

}  // namespace sysopt
