#pragma once

#include <string>
#include <vector>

#include "agora/common/kinds.hpp"
#include "agora/ecl/config.hpp"

namespace agora::ecl {

struct Viewer {
    std::string participant_id;
    ParticipantKind kind = ParticipantKind::Human;
    std::string role = "participant";
    std::string group;
};

struct ResolvedBinding {
    AttributeRef ref;
    std::string label;
    TypeSpec type;
    Visibility visibility = Visibility::Public;
};

struct SlotView {
    ModuleSlot slot = ModuleSlot::MyStatus;
    std::vector<ResolvedBinding> bindings;
};

/// What the interaction controls allow for a particular viewer.
/// An empty `dashboard_fields` list means every dashboard binding; entries
/// name Participant attributes ("wealth") or full refs ("Participant.wealth").
struct ViewOverlay {
    bool dashboard = true;
    std::vector<std::string> dashboard_fields;
};

bool audience_matches(const Audience& audience, const Viewer& viewer);

/// All five module slots in canonical order, each holding the bindings whose
/// audience matches the viewer. Private attributes never appear in shared
/// slots (social, dashboard). Throws Error(UnknownRole) for an undeclared role.
std::vector<SlotView> resolve_views(const ExperimentConfig& config, const Viewer& viewer,
                                    const ViewOverlay& overlay = {});

}  // namespace agora::ecl
