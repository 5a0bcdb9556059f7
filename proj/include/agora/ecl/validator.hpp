#pragma once

#include <string>
#include <vector>

#include "agora/common/json.hpp"
#include "agora/ecl/config.hpp"

namespace agora::ecl {

/// One configuration conflict. `code` is a stable snake_case tag
/// (duplicate_object_class, privacy_violation, policy_missing_action, ...).
struct Conflict {
    std::string code;
    std::string message;
    std::string location;
};

struct ValidationReport {
    std::vector<Conflict> conflicts;

    bool valid() const { return conflicts.empty(); }
    json to_json() const;
    /// One line per conflict, or "ok" when clean.
    std::string render() const;
};

/// Checks a config for conflicts. Works on configs built in code as well as
/// parsed ones, so it re-derives everything the parser would have derived.
ValidationReport validate_config(const ExperimentConfig& config);

}  // namespace agora::ecl
