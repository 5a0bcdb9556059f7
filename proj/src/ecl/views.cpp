#include "agora/ecl/views.hpp"

#include <algorithm>

#include "agora/common/error.hpp"

namespace agora::ecl {

bool audience_matches(const Audience& audience, const Viewer& viewer) {
    switch (audience.kind) {
        case Audience::Kind::All: return true;
        case Audience::Kind::Humans: return viewer.kind == ParticipantKind::Human;
        case Audience::Kind::Agents: return viewer.kind == ParticipantKind::Agent;
        case Audience::Kind::Role: return viewer.role == audience.role;
    }
    return false;
}

namespace {

bool field_selected(const ViewOverlay& overlay, const AttributeRef& ref) {
    if (overlay.dashboard_fields.empty()) return true;
    auto& f = overlay.dashboard_fields;
    return std::find(f.begin(), f.end(), ref.attribute) != f.end() ||
           std::find(f.begin(), f.end(), ref.str()) != f.end();
}

}  // namespace

std::vector<SlotView> resolve_views(const ExperimentConfig& config, const Viewer& viewer, const ViewOverlay& overlay) {
    if (!config.has_role(viewer.role)) throw Error(ErrorCode::UnknownRole, "role '" + viewer.role + "' is not declared");
    std::vector<SlotView> out;
    for (auto slot : kAllSlots) {
        SlotView sv{slot, {}};
        if (slot == ModuleSlot::Dashboard && !overlay.dashboard) {
            out.push_back(std::move(sv));
            continue;
        }
        for (auto& view : config.views) {
            if (view.slot != slot || !audience_matches(view.audience, viewer)) continue;
            for (auto& b : view.bindings) {
                const ObjectClass* cls = config.find_class(b.ref.owner);
                const AttributeDef* attr = cls ? cls->find(b.ref.attribute) : nullptr;
                if (!attr) continue;
                if (!is_owner_slot(slot) && attr->visibility == Visibility::Private) continue;
                if (slot == ModuleSlot::Dashboard && !field_selected(overlay, b.ref)) continue;
                bool dup = std::any_of(sv.bindings.begin(), sv.bindings.end(),
                                       [&](const ResolvedBinding& r) { return r.ref == b.ref; });
                if (!dup) sv.bindings.push_back(ResolvedBinding{b.ref, b.label, attr->type, attr->visibility});
            }
        }
        out.push_back(std::move(sv));
    }
    return out;
}

}  // namespace agora::ecl
