#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agora/common/rng.hpp"
#include "agora/engine/engine.hpp"

namespace agora::testkit {

std::string asset_path(const std::string& rel);

std::shared_ptr<const ecl::ExperimentConfig> shape_factory();
std::shared_ptr<const ecl::ExperimentConfig> daytrader();

/// H1 (human) then A1..A{n-1} (agents), all in group "default".
std::vector<engine::RosterEntry> roster(int n, int humans = 1);

/// Shape Factory session "123" with the default six-seat roster.
engine::SessionState shape_factory_session(const controls::InteractionControls& c = {}, std::uint64_t seed = 7);

/// Starts the session at t = 0.
engine::SessionState live(engine::SessionState s);

/// Applies and asserts nothing; returns the committed state or the input.
engine::ActionResult act(const engine::SessionState& s, const std::string& actor, const std::string& type, json args,
                         std::int64_t now);

/// A plausible request drawn from the state: mostly well-formed, sometimes
/// referencing real offers and held shapes, sometimes deliberately invalid.
engine::ActionRequest random_request(const engine::SessionState& s, SeededStream& rng);

/// Nullopt when money and shape balances close; otherwise what broke.
std::optional<std::string> conservation_violation(const engine::SessionState& s);

}  // namespace agora::testkit
