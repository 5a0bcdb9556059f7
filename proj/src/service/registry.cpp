#include "agora/service/registry.hpp"

#include "agora/service/event_log.hpp"

namespace agora::service {

namespace fs = std::filesystem;

json entry_to_json(const RegistryEntry& e) {
    json roster = json::array();
    for (auto& r : e.roster) roster.push_back(engine::roster_entry_to_json(r));
    return {{"session_id", e.session_id},       {"paradigm", e.paradigm}, {"template_id", e.template_id},
            {"config_hash", e.config_hash},     {"controls", e.controls}, {"roster", roster},
            {"phase", e.phase},                 {"created_at", e.created_at}, {"seed", e.seed},
            {"require_all_humans", e.require_all_humans}};
}

RegistryEntry entry_from_json(const json& j) {
    RegistryEntry e;
    e.session_id = j.at("session_id").get<std::string>();
    e.paradigm = j.value("paradigm", "");
    e.template_id = j.value("template_id", "");
    e.config_hash = j.value("config_hash", "");
    e.controls = j.value("controls", json::object());
    for (auto& r : j.value("roster", json::array())) e.roster.push_back(engine::roster_entry_from_json(r));
    e.phase = j.value("phase", "created");
    e.created_at = j.value("created_at", std::int64_t{0});
    e.seed = j.value("seed", std::uint64_t{0});
    e.require_all_humans = j.value("require_all_humans", true);
    return e;
}

Registry::Registry(fs::path data_dir) : path_(data_dir / "registry.json") {
    std::error_code ec;
    fs::create_directories(data_dir, ec);
    if (!fs::exists(path_)) return;
    auto j = json::parse(read_file(path_), nullptr, false);
    if (!j.is_object()) throw Error(ErrorCode::StorageFailure, "unreadable registry " + path_.string());
    next_id_ = j.value("next_id", kFirstId);
    try {
        for (auto& e : j.value("sessions", json::array())) entries_.push_back(entry_from_json(e));
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::StorageFailure, std::string("malformed registry entry: ") + ex.what());
    }
}

void Registry::save_locked() const {
    json sessions = json::array();
    for (auto& e : entries_) sessions.push_back(entry_to_json(e));
    atomic_write_file(path_, json{{"next_id", next_id_}, {"sessions", sessions}}.dump(1) + "\n");
}

std::string Registry::allocate_id() {
    std::lock_guard lock(mu_);
    auto id = std::to_string(next_id_++);
    save_locked();
    return id;
}

void Registry::put(const RegistryEntry& e) {
    std::lock_guard lock(mu_);
    bool replaced = false;
    for (auto& x : entries_)
        if (x.session_id == e.session_id) {
            x = e;
            replaced = true;
        }
    if (!replaced) entries_.push_back(e);
    save_locked();
}

std::optional<RegistryEntry> Registry::get(const std::string& id) const {
    std::lock_guard lock(mu_);
    for (auto& e : entries_)
        if (e.session_id == id) return e;
    return std::nullopt;
}

std::vector<RegistryEntry> Registry::list() const {
    std::lock_guard lock(mu_);
    return entries_;
}

}  // namespace agora::service
