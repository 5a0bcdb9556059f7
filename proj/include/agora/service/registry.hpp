#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agora/engine/state.hpp"

namespace agora::service {

struct RegistryEntry {
    std::string session_id;
    std::string paradigm;
    /// Bundled or uploaded template the config came from; empty for inline ECL.
    std::string template_id;
    std::string config_hash;
    json controls;
    std::vector<engine::RosterEntry> roster;
    std::string phase = "created";
    std::int64_t created_at = 0;
    std::uint64_t seed = 0;
    bool require_all_humans = true;
};

json entry_to_json(const RegistryEntry& e);
RegistryEntry entry_from_json(const json& j);

/// The session index, kept in <data_dir>/registry.json and rewritten
/// atomically on every change. Session ids are decimal numbers from 101 up.
class Registry {
public:
    static constexpr std::int64_t kFirstId = 101;

    /// Loads the index when present; Error(StorageFailure) when unreadable.
    explicit Registry(std::filesystem::path data_dir);

    /// Reserves the next id and persists it, so ids are never reused.
    std::string allocate_id();
    void put(const RegistryEntry& e);
    std::optional<RegistryEntry> get(const std::string& id) const;
    std::vector<RegistryEntry> list() const;

private:
    void save_locked() const;

    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::int64_t next_id_ = kFirstId;
    std::vector<RegistryEntry> entries_;
};

}  // namespace agora::service
