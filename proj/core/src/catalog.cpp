#include "sysopt/catalog.hpp"

#include <json.hpp>

#include "sysopt/error.hpp"
#include "sysopt/fs.hpp"

namespace sysopt {

PatternCatalog PatternCatalog::defaults() {
    PatternCatalog c;
    c.service_call_types = {"Client", "WebTarget", "RESTClient", "HttpClient"};
    c.db_access_types = {"EntityManager", "Connection", "PreparedStatement", "Query"};
    c.external_types = {"Socket", "URL"};
    c.endpoint_annotations = {"Path", "GET", "POST", "PUT", "DELETE", "WebServlet"};
    c.http_method_annotations = {"GET", "POST", "PUT", "DELETE"};
    c.servlet_bases = {"HttpServlet"};
    c.internal_api_classes = {};
    c.stateless_serializers = {"ObjectMapper", "Gson"};
    c.rule_severities = {{"R1", 6.0}, {"R2", 5.0}, {"R3", 4.0}, {"R4", 7.0}};
    return c;
}

PatternCatalog load_catalog_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("catalog is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::config_error, "catalog root must be a JSON object");
    }

    PatternCatalog c = PatternCatalog::defaults();
    auto read_list = [&](const char* key, std::vector<std::string>& into) {
        if (!doc.contains(key)) return;
        if (!doc[key].is_array()) {
            throw Error(ErrorCode::config_error, std::string("catalog key '") + key + "' must be an array");
        }
        into.clear();
        for (const auto& v : doc[key]) {
            if (!v.is_string()) {
                throw Error(ErrorCode::config_error, std::string("catalog key '") + key + "' must hold strings");
            }
            into.push_back(v.get<std::string>());
        }
    };
    read_list("service_call_types", c.service_call_types);
    read_list("db_access_types", c.db_access_types);
    read_list("external_types", c.external_types);
    read_list("endpoint_annotations", c.endpoint_annotations);
    read_list("http_method_annotations", c.http_method_annotations);
    read_list("servlet_bases", c.servlet_bases);
    read_list("internal_api_classes", c.internal_api_classes);
    read_list("stateless_serializers", c.stateless_serializers);

    if (doc.contains("rule_severities")) {
        if (!doc["rule_severities"].is_object()) {
            throw Error(ErrorCode::config_error, "catalog key 'rule_severities' must be an object");
        }
        for (auto it = doc["rule_severities"].begin(); it != doc["rule_severities"].end(); ++it) {
            if (!it.value().is_number()) {
                throw Error(ErrorCode::config_error, "rule severity must be a number");
            }
            double v = it.value().get<double>();
            if (v <= 0.0 || v > 10.0) {
                throw Error(ErrorCode::config_error,
                            "rule severity for " + it.key() + " must be in (0, 10]");
            }
            c.rule_severities[it.key()] = v;
        }
    }
    return c;
}

PatternCatalog load_catalog_file(const std::string& path) {
    auto text = read_file(path);
    if (!text) throw Error(ErrorCode::config_error, "catalog file not readable: " + path);
    return load_catalog_text(*text);
}

}  // namespace sysopt
