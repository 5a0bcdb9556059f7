#pragma once

#include <set>
#include <string>

#include "agora/common/json.hpp"
#include "agora/ecl/views.hpp"
#include "agora/engine/state.hpp"

namespace agora::engine {

/// Name shown to others: the social-framing override for agents, else the roster name.
std::string shown_name(const SessionState& s, const ParticipantRecord& p);

ecl::Viewer viewer_of(const ParticipantRecord& p);

/// What the controls let this viewer see in the view layer.
ecl::ViewOverlay overlay_for(const controls::InteractionControls& c, const ecl::Viewer& viewer);

/// The state as `viewer_id` may see it (money in dollars, times in ms):
///   own        every attribute of the viewer's own record, regardless of controls
///   modules    owner-slot bindings (my_status, my_actions, my_tasks) and class
///              constants bound in shared slots
///   peers      one entry per other participant with its social-slot attributes;
///              group-scoped ones only for same-group peers, private ones never
///   dashboard  present only when enabled for this viewer; summary granularity
///              replaces numbers with quartile bands over the observed range
///   offers     pending offers the viewer made or received
///   chat       channel mode and, under turn-taking, the current turn holder
/// Throws Error(UnknownParticipant).
json filter_visible_state(const SessionState& s, const std::string& viewer_id, std::int64_t now);

/// Attribute selectors present in a visible-state payload ("own.wealth",
/// "module.my_actions.Shape.regular_cost", "peer.display_name", "dashboard.wealth").
std::set<std::string> visible_selectors(const json& visible);

/// Selectors a viewer is entitled to, derived from configuration and controls
/// alone. `same_group_peers` says whether the viewer shares a group with anyone.
std::set<std::string> visible_spec(const ecl::ExperimentConfig& config, const controls::InteractionControls& c,
                                   const ecl::Viewer& viewer, bool same_group_peers);

}  // namespace agora::engine
