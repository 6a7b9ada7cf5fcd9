#pragma once

#include <string>

#include "sysopt/code_model.hpp"

namespace sysopt {

// Parses one Java-style source file into a SourceUnit.
//
// Recognized subset: package, imports, class/interface/enum declarations,
// field declarations with modifiers, method declarations with modifiers and
// annotations, and inside method bodies: calls, `new` expressions,
// `synchronized` blocks, loops and branches. Anything else is opaque text;
// unknown constructs are skipped with a diagnostic, never aborting the parse.
//
// Throws Error(UnreadableSource) when the bytes are not valid UTF-8.
ParsedUnit parse_unit(const std::string& source_text, const std::string& path);

// Parses every file under `root` matched by the config globs into a
// CodeModel with deterministic (lexicographic) unit ordering.
// Throws Error(NoSourcesFound) when no file matches.
CodeModel parse_repository(const std::string& root, const RepoConfig& config);

// Re-parses a single file of an existing model (after a patch) and returns
// the updated model. The file must already be part of the model.
CodeModel reparse_file(const CodeModel& model, const std::string& path,
                       const std::string& new_content);

}  // namespace sysopt
