#pragma once

#include <map>
#include <string>
#include <vector>

namespace sysopt {

// Data-driven pattern knowledge: type names, annotations and base classes
// that parameterize endpoint detection, interaction-site matching and the
// detection rules. Loading a catalog file replaces whole sets; keys that
// are absent keep their defaults.
struct PatternCatalog {
    std::vector<std::string> service_call_types;
    std::vector<std::string> db_access_types;
    std::vector<std::string> external_types;
    std::vector<std::string> endpoint_annotations;
    std::vector<std::string> http_method_annotations;
    std::vector<std::string> servlet_bases;
    std::vector<std::string> internal_api_classes;
    std::vector<std::string> stateless_serializers;
    std::map<std::string, double> rule_severities;

    static PatternCatalog defaults();

    bool has_interaction_names() const {
        return !service_call_types.empty() || !db_access_types.empty() ||
               !external_types.empty();
    }
};

// Parses a catalog JSON document. Throws Error(ConfigError) on malformed
// input.
PatternCatalog load_catalog_text(const std::string& json_text);

PatternCatalog load_catalog_file(const std::string& path);

}  // namespace sysopt
