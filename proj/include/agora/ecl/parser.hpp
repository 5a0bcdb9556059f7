#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agora/common/error.hpp"
#include "agora/common/json.hpp"
#include "agora/ecl/config.hpp"

namespace agora::ecl {

/// One parse problem. `kind` is SyntaxError, UnsupportedVersion,
/// UnknownReference or TypeMismatch; `subject` names the offending identifier.
struct Diagnostic {
    ErrorCode kind = ErrorCode::SyntaxError;
    SourcePos pos;
    std::string message;
    std::string subject;
    /// Finer classification used by the validator (e.g. "policy_missing_action").
    std::string rule;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return config.has_value() && diagnostics.empty(); }
};

/// Parses and compiles an ECL document: syntax, type aliases, defaults,
/// derived policy links, name resolution and expression typing.
/// Pure; the same text always yields the same result.
ParseResult parse_config(std::string_view text);

/// Reads a file and parses it; throws Error(InvalidConfig) carrying the
/// rendered diagnostics when the document does not compile.
ExperimentConfig load_config_file(const std::filesystem::path& path);
ExperimentConfig compile_or_throw(std::string_view text);

/// Parses a standalone expression without resolving names (tests, tooling).
Expr parse_expression(std::string_view text);

/// Parses a literal (`$12.50`, `15s`, `3`, `true`, `"x"`, `circle`, `[a, b]`)
/// and converts it to `type`. Used for parameter overrides.
Value parse_literal(std::string_view text, const TypeSpec& type);

std::string format_diagnostic(const Diagnostic& d);
json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics);

}  // namespace agora::ecl
