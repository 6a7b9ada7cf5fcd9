#include "sysopt/code_model.hpp"

#include <algorithm>
#include <set>

namespace sysopt {

const char* to_string(Visibility v) {
    switch (v) {
        case Visibility::public_v: return "public";
        case Visibility::protected_v: return "protected";
        case Visibility::package_v: return "package";
        case Visibility::private_v: return "private";
    }
    return "package";
}

const char* to_string(TypeKind k) {
    switch (k) {
        case TypeKind::class_k: return "class";
        case TypeKind::interface_k: return "interface";
        case TypeKind::enum_k: return "enum";
    }
    return "class";
}

std::string simple_type_name(const std::string& type_text) {
    std::string t = type_text;
    auto lt = t.find('<');
    if (lt != std::string::npos) t = t.substr(0, lt);
    auto br = t.find('[');
    if (br != std::string::npos) t = t.substr(0, br);
    auto dot = t.rfind('.');
    if (dot != std::string::npos) t = t.substr(dot + 1);
    while (!t.empty() && (t.back() == '.' || t.back() == ' ')) t.pop_back();
    return t;
}

void CodeModel::finalize() {
    type_index_.clear();
    simple_index_.clear();
    method_owner_.clear();
    method_index_.clear();
    for (size_t u = 0; u < units.size(); ++u) {
        for (size_t t = 0; t < units[u].types.size(); ++t) {
            const TypeDecl& td = units[u].types[t];
            type_index_.emplace(td.qualified_name, std::make_pair(u, t));
            simple_index_.emplace(td.name, std::make_pair(u, t));
            for (const MethodDecl& m : td.methods) {
                method_owner_.emplace(m.signature_key, std::make_pair(u, t));
                method_index_.emplace(m.signature_key, &m);
            }
        }
    }
}

const TypeDecl* CodeModel::find_type(const std::string& qualified_name) const {
    auto it = type_index_.find(qualified_name);
    if (it == type_index_.end()) return nullptr;
    return &units[it->second.first].types[it->second.second];
}

std::vector<const TypeDecl*> CodeModel::types_with_simple_name(const std::string& simple) const {
    std::vector<const TypeDecl*> out;
    auto [lo, hi] = simple_index_.equal_range(simple);
    for (auto it = lo; it != hi; ++it) {
        out.push_back(&units[it->second.first].types[it->second.second]);
    }
    return out;
}

const MethodDecl* CodeModel::find_method(const std::string& signature_key) const {
    auto it = method_index_.find(signature_key);
    return it == method_index_.end() ? nullptr : it->second;
}

const TypeDecl* CodeModel::owner_of_method(const std::string& signature_key) const {
    auto it = method_owner_.find(signature_key);
    if (it == method_owner_.end()) return nullptr;
    return &units[it->second.first].types[it->second.second];
}

const SourceUnit* CodeModel::unit_of_type(const std::string& qualified_name) const {
    auto it = type_index_.find(qualified_name);
    if (it == type_index_.end()) return nullptr;
    return &units[it->second.first];
}

std::vector<std::string> CodeModel::supertype_closure(const std::string& qualified_name) const {
    std::vector<std::string> order;
    std::set<std::string> seen;
    std::vector<std::string> work{qualified_name};
    while (!work.empty()) {
        std::string q = work.back();
        work.pop_back();
        if (!seen.insert(q).second) continue;
        order.push_back(q);
        const TypeDecl* td = find_type(q);
        if (!td) continue;
        for (const std::string& sup : td->supertypes) {
            // Resolve textually: exact qualified name first, then simple name.
            if (find_type(sup)) {
                work.push_back(sup);
                continue;
            }
            for (const TypeDecl* cand : types_with_simple_name(simple_type_name(sup))) {
                work.push_back(cand->qualified_name);
            }
        }
    }
    std::sort(order.begin(), order.end());
    return order;
}

size_t CodeModel::method_count() const {
    size_t n = 0;
    for (const auto& u : units) {
        for (const auto& t : u.types) n += t.methods.size();
    }
    return n;
}

}  // namespace sysopt
