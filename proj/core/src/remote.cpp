#include <httplib.h>
#include <json.hpp>

#include "sysopt/diff.hpp"
#include "sysopt/error.hpp"
#include "sysopt/json_io.hpp"
#include "sysopt/patching.hpp"

namespace sysopt {

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host:port
    std::string path;  // leading '/', defaults to "/"
};

ParsedUrl split_url(const std::string& url) {
    ParsedUrl out;
    size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw Error(ErrorCode::config_error, "remote_url must include a scheme: " + url);
    }
    size_t path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) {
        out.base = url;
        out.path = "/";
    } else {
        out.base = url.substr(0, path_start);
        out.path = url.substr(path_start);
    }
    return out;
}

}  // namespace

PatchSet request_remote_patches(const AnalysisReport& report, const SystemSummary& summary,
                                const BackendSelector& selector, int iteration,
                                std::vector<Diagnostic>* diagnostics) {
    if (selector.mode != BackendSelector::Mode::remote || selector.remote_url.empty()) {
        throw Error(ErrorCode::config_error, "remote backend requested without a remote_url");
    }
    ParsedUrl url = split_url(selector.remote_url);

    httplib::Client client(url.base);
    auto secs = static_cast<time_t>(selector.timeout_s);
    auto usecs = static_cast<time_t>((selector.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    nlohmann::json body{
        {"schema_version", kSchemaVersion},
        {"system_summary", nlohmann::json::parse(to_json_string(summary))},
        {"analysis_report", nlohmann::json::parse(to_json_string(report))},
    };

    httplib::Result res = client.Post(url.path, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::remote_timeout,
                    "no response from " + selector.remote_url + " (" +
                        httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw Error(ErrorCode::remote_protocol_error,
                    "remote backend answered HTTP " + std::to_string(res->status));
    }

    PatchSet set;
    set.base_fingerprint = summary.repo_fingerprint;
    set.iteration = iteration;

    auto note = [&](const std::string& msg) {
        if (diagnostics) {
            diagnostics->push_back({Severity::warning, selector.remote_url, 0, 0,
                                    "remote-response", msg});
        }
    };

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        note(std::string("response body is not JSON: ") + e.what());
        return set;
    }
    if (!parsed.is_object() || !parsed.contains("patches") || !parsed["patches"].is_array()) {
        note("response lacks a patches array");
        return set;
    }

    for (const auto& pj : parsed["patches"]) {
        if (!pj.is_object() || !pj.contains("finding_id") || !pj.contains("diff")) {
            note("patch entry lacks finding_id/diff");
            continue;
        }
        Patch p;
        p.finding_id = pj.value("finding_id", "");
        p.diff = pj.value("diff", "");
        p.justification = pj.value("justification", "");
        for (const Finding& f : report.findings) {
            if (f.id == p.finding_id) {
                p.rule_id = f.rule_id;
                break;
            }
        }
        try {
            p.target_path = diff_target_path(parse_unified_diff(p.diff));
        } catch (const Error& e) {
            note("patch for " + p.finding_id + " carries an unusable diff: " + e.what());
            continue;
        }
        set.patches.push_back(std::move(p));
    }
    return set;
}

}  // namespace sysopt
