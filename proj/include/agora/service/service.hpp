#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "agora/acp/loop.hpp"
#include "agora/agents/llm.hpp"
#include "agora/agents/scripted.hpp"
#include "agora/service/event_log.hpp"
#include "agora/service/registry.hpp"

namespace agora::service {

/// Version tag of every real-time envelope.
inline constexpr std::string_view kRealtimeVersion = "agora-rt/1";

/// An Error carrying structured detail for the client (a validation report).
class RequestError : public Error {
public:
    RequestError(ErrorCode code, const std::string& message, json details)
        : Error(code, message), details_(std::move(details)) {}
    const json& details() const noexcept { return details_; }

private:
    json details_;
};

/// Outgoing real-time messages of one client, in order. Each message is an
/// envelope {"v", "type", "n", "payload"} where n counts from 1 per channel.
class Channel {
public:
    void push(std::string_view type, json payload);
    /// Next envelope, or nullopt after `wait` with nothing queued or once
    /// closed and drained.
    std::optional<json> next(std::chrono::milliseconds wait);
    /// Queues a final "closed" message and closes.
    void close(std::string_view reason);
    bool closed() const;
    /// Everything pushed so far, for tests and monitors' consistency checks.
    std::vector<json> drain();

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<json> queue_;
    std::int64_t n_ = 0;
    bool closed_ = false;
};

enum class AgentMode { Scripted, Llm };

struct ServiceOptions {
    std::filesystem::path data_dir = "agora-data";
    /// Holds paradigms/, controls/, prompts/ and personas/.
    std::filesystem::path asset_dir;
    std::string researcher_token;
    AgentMode agent_mode = AgentMode::Scripted;
    agents::CompletionEndpointConfig endpoint;
    agents::ShapeFactoryScriptOptions script;
    /// Epoch milliseconds; tests substitute a controllable clock.
    std::function<std::int64_t()> clock;
    /// Period of the service timer that completes production, ends sessions
    /// on time and sends timer messages. Zero disables the thread (tests call
    /// tick_all themselves).
    Duration timer_period{200};
    bool run_agents = true;

    /// Reads AGORA_DATA_DIR, AGORA_RESEARCHER_TOKEN and the completion
    /// endpoint variables; LLM agents when AGORA_LLM_API_KEY is set.
    static ServiceOptions from_env(std::filesystem::path asset_dir);
};

struct CreateSessionRequest {
    std::string template_id;  // bundled or uploaded paradigm
    std::string config_ecl;   // inline ECL instead of a template
    /// Controls object, or the name of a bundled preset, or null for defaults.
    json controls;
    /// Parameter overrides as ECL literals ("900s", "$250") or JSON numbers.
    json parameters = json::object();
    /// Empty: one human H1 then agents A1.. up to participant_count.
    std::vector<engine::RosterEntry> roster;
    std::optional<std::uint64_t> seed;
    bool require_all_humans = true;
};

/// Roster entries may give persona_profile as an object or name a bundled
/// persona with "persona".
CreateSessionRequest create_request_from_json(const json& j, const json& personas);

struct JoinResult {
    std::shared_ptr<Channel> channel;
    json initial;
};

/// Sessions, their logs and clients. Every mutation of a session goes through
/// its engine::Session commit queue; fan-out to channels happens after the
/// event log has synced the batch.
class SessionService {
public:
    explicit SessionService(ServiceOptions options);
    ~SessionService();
    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    const ServiceOptions& options() const { return options_; }
    bool researcher_authorized(std::string_view bearer_token) const;

    json list_paradigms() const;
    /// Validates and stores an ECL template. RequestError(InvalidConfig) carries
    /// the diagnostics or the validation report.
    json upload_template(const std::string& ecl_text, const std::string& template_id = "");
    json list_controls_presets() const;
    json personas() const { return personas_; }

    std::string create_session(const CreateSessionRequest& req);
    json list_sessions() const;
    json session_info(const std::string& id) const;

    /// Claims a human seat or takes it over from an older connection, whose
    /// channel is closed. The initial message is the viewer's snapshot.
    JoinResult join(const std::string& id, const std::string& participant_id);
    json start(const std::string& id, bool force = false);
    json end(const std::string& id);
    /// A human participant's action. Error(SeatTaken) for an agent seat.
    engine::SubmitResult submit(const std::string& id, const std::string& participant_id, const std::string& type,
                                json args);

    /// Researcher feed: every committed event in log order, aggregate
    /// snapshots, alerts and agent incidents.
    std::shared_ptr<Channel> monitor(const std::string& id);

    std::string export_raw(const std::string& id) const;
    std::string export_flattened(const std::string& id) const;
    json report(const std::string& id, const std::optional<std::string>& participant) const;

    /// One timer step over all live sessions.
    void tick_all();

    /// The live engine session, for tests and tools.
    std::shared_ptr<const engine::SessionState> snapshot(const std::string& id) const;
    /// Test hook on a session's event log.
    void set_log_fault(const std::string& id, std::function<void()> fault);

private:
    struct Runtime;

    std::shared_ptr<Runtime> runtime(const std::string& id) const;
    std::shared_ptr<Runtime> open_runtime(RegistryEntry entry, engine::SessionState state,
                                          std::unique_ptr<FileEventLog> log, std::vector<engine::CommittedEvent> events);
    void recover();
    void launch_agents(Runtime& rt);
    void finalize(Runtime& rt);
    void alert_storage(Runtime& rt, const std::string& what);
    std::filesystem::path log_path(const std::string& id) const;
    std::string template_text(const std::string& id) const;
    std::int64_t now() const { return options_.clock(); }

    ServiceOptions options_;
    json personas_;
    Registry registry_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Runtime>> sessions_;
    std::mutex create_mu_;
    std::jthread timer_;
};

/// Visible participant counterparts of an agent action, who see its typing indicator.
std::vector<std::string> action_counterparts(const engine::SessionState& s, const engine::ActionRequest& r);

}  // namespace agora::service
