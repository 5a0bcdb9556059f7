#pragma once

#include <string>

#include "agora/ecl/config.hpp"

namespace agora::ecl {

/// Canonical ECL text for a config. parse_config(serialize_config(c)) yields
/// a config structurally equal to `c`; empty sections are written explicitly.
std::string serialize_config(const ExperimentConfig& config);

/// Minimal-parenthesis rendering that parses back to the same tree.
std::string serialize_expression(const Expr& expr);

std::string serialize_literal(const Value& value);

std::string quote(const std::string& s);

}  // namespace agora::ecl
