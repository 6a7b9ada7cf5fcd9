#pragma once

#include <stdexcept>
#include <string>

namespace sysopt {

enum class ErrorCode {
    unreadable_source,
    no_sources_found,
    ambiguous_service_boundary,
    empty_catalog,
    malformed_build_file,
    inconsistent_inputs,
    not_applicable,
    stale_evidence,
    parse_failure_after_patch,
    fingerprint_mismatch,
    remote_timeout,
    remote_protocol_error,
    test_timeout,
    command_not_found,
    empty_benchmark_file,
    unrecognized_header,
    no_successful_samples,
    schema_version_mismatch,
    corrupt_state,
    config_error,
    io_error,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sysopt
