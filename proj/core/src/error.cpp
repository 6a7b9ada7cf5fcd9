#include "sysopt/error.hpp"

namespace sysopt {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::unreadable_source: return "UnreadableSource";
        case ErrorCode::no_sources_found: return "NoSourcesFound";
        case ErrorCode::ambiguous_service_boundary: return "AmbiguousServiceBoundary";
        case ErrorCode::empty_catalog: return "EmptyCatalog";
        case ErrorCode::malformed_build_file: return "MalformedBuildFile";
        case ErrorCode::inconsistent_inputs: return "InconsistentInputs";
        case ErrorCode::not_applicable: return "NotApplicable";
        case ErrorCode::stale_evidence: return "StaleEvidence";
        case ErrorCode::parse_failure_after_patch: return "ParseFailureAfterPatch";
        case ErrorCode::fingerprint_mismatch: return "FingerprintMismatch";
        case ErrorCode::remote_timeout: return "RemoteTimeout";
        case ErrorCode::remote_protocol_error: return "RemoteProtocolError";
        case ErrorCode::test_timeout: return "TestTimeout";
        case ErrorCode::command_not_found: return "CommandNotFound";
        case ErrorCode::empty_benchmark_file: return "EmptyBenchmarkFile";
        case ErrorCode::unrecognized_header: return "UnrecognizedHeader";
        case ErrorCode::no_successful_samples: return "NoSuccessfulSamples";
        case ErrorCode::schema_version_mismatch: return "SchemaVersionMismatch";
        case ErrorCode::corrupt_state: return "CorruptState";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::io_error: return "IoError";
    }
    return "UnknownError";
}

}  // namespace sysopt
