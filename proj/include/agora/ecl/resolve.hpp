#pragma once

#include <vector>

#include "agora/ecl/config.hpp"
#include "agora/ecl/parser.hpp"

namespace agora::ecl {

/// Reserved expression owners; object classes may not use these names.
inline constexpr std::string_view kScopeOwners[] = {"actor", "target", "args", "param", "session"};
bool is_scope_owner(std::string_view name);

/// Actions that carry a trade counterpart, so `target.*` is bound.
bool has_counterpart(std::string_view action);

/// Resolves type aliases, converts attribute defaults, derives each action's
/// required_policies and types every expression in place. Returns one
/// diagnostic per dangling name or ill-typed expression (empty when closed).
std::vector<Diagnostic> resolve_config(ExperimentConfig& config);

}  // namespace agora::ecl
