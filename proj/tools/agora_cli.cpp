#include <csignal>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "agora/analysis/metrics.hpp"
#include "agora/ecl/parser.hpp"
#include "agora/ecl/serializer.hpp"
#include "agora/ecl/validator.hpp"
#include "agora/service/http.hpp"
#include "agora/service/service.hpp"
#include "agora/sim/simulator.hpp"

using namespace agora;
namespace fs = std::filesystem;

namespace {

fs::path default_assets() {
    if (const char* a = std::getenv("AGORA_ASSET_DIR"); a && *a) return a;
    return AGORA_DEFAULT_ASSET_DIR;
}

void write_out(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::StorageFailure, "cannot write " + path);
    f << content;
}

controls::InteractionControls load_controls(const std::string& arg, const fs::path& assets) {
    if (arg.empty()) return {};
    if (fs::exists(arg)) return controls::load_controls_file(arg);
    const auto preset = assets / "controls" / (arg + ".json");
    if (fs::exists(preset)) return controls::load_controls_file(preset.string());
    throw Error(ErrorCode::InvalidControls, "no controls file or preset " + arg);
}

// "name=value" pairs into parameter overrides; values are ECL literals
json parse_params(const std::vector<std::string>& params) {
    json out = json::object();
    for (auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "parameter must be name=value: " + p);
        out[p.substr(0, eq)] = p.substr(eq + 1);
    }
    return out;
}

service::LoadedLog load_session_log(const std::string& log, const fs::path& data_dir, const std::string& session) {
    if (!log.empty()) return service::read_log(log);
    if (session.empty()) throw Error(ErrorCode::InvalidConfig, "give --session or --log");
    return service::read_log(data_dir / "sessions" / session / "events.jsonl");
}

int run_validate(const std::string& file, bool as_json) {
    auto parsed = ecl::parse_config(service::read_file(file));
    if (!parsed.ok()) {
        if (as_json) std::cout << json{{"valid", false}, {"diagnostics", ecl::diagnostics_to_json(parsed.diagnostics)}}.dump(2) << "\n";
        else
            for (auto& d : parsed.diagnostics) std::cerr << file << ":" << ecl::format_diagnostic(d) << "\n";
        return 1;
    }
    auto report = ecl::validate_config(*parsed.config);
    if (as_json) std::cout << json{{"valid", report.valid()}, {"report", report.to_json()}}.dump(2) << "\n";
    else
        std::cout << report.render();
    return report.valid() ? 0 : 1;
}

int run_serve(service::ServiceOptions options, const std::string& host, int port) {
    if (options.researcher_token.empty()) {
        std::random_device rd;
        std::mt19937_64 gen(rd());
        char buf[33];
        std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                      static_cast<unsigned long long>(gen()));
        options.researcher_token = buf;
        std::cerr << "researcher token: " << options.researcher_token << "\n";
    }
    // signals are taken by a dedicated thread so stop() never runs in a handler
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    service::SessionService svc(std::move(options));
    service::HttpServer http(svc);
    const int bound = http.bind(host, port);
    if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    std::cerr << "listening on http://" << host << ":" << bound << "\n";
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        http.stop();
    });
    http.listen();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agora: configurable human-agent experiment sessions"};
    app.require_subcommand(1);

    std::string data_dir = "agora-data";
    std::string asset_dir = default_assets().string();
    app.add_option("--data-dir", data_dir, "Session registry, logs and uploaded templates")->envname("AGORA_DATA_DIR");
    app.add_option("--assets", asset_dir, "Bundled paradigms, controls, prompts and personas");

    // ecl validate | format
    auto* ecl_cmd = app.add_subcommand("ecl", "Check or normalise an ECL configuration");
    ecl_cmd->require_subcommand(1);
    std::string ecl_file;
    bool ecl_json = false;
    auto* validate = ecl_cmd->add_subcommand("validate", "Compile and validate; exit 1 on any problem");
    validate->add_option("file", ecl_file)->required()->check(CLI::ExistingFile);
    validate->add_flag("--json", ecl_json, "Machine-readable report");
    auto* format = ecl_cmd->add_subcommand("format", "Print the canonical form");
    format->add_option("file", ecl_file)->required()->check(CLI::ExistingFile);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API and real-time streams");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string token;
    bool llm = false;
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--token", token, "Researcher bearer token")->envname("AGORA_RESEARCHER_TOKEN");
    serve->add_flag("--llm", llm, "Drive agents with the completion endpoint instead of scripts");

    // create-session
    auto* create = app.add_subcommand("create-session", "Create a session and print its id");
    std::string config_file, template_id = "shape_factory", controls_arg, server;
    std::vector<std::string> params;
    std::optional<std::uint64_t> seed;
    bool no_require = false;
    create->add_option("--config", config_file, "ECL file (instead of --template)")->check(CLI::ExistingFile);
    create->add_option("--template", template_id, "Bundled or uploaded paradigm");
    create->add_option("--controls", controls_arg, "Controls JSON file or preset name");
    create->add_option("--param", params, "Parameter override name=value (ECL literal)");
    create->add_option("--seed", seed);
    create->add_flag("--no-require-humans", no_require, "Allow start before every human seat has joined");
    create->add_option("--server", server, "Create through a running server (http://host:port)");
    create->add_option("--token", token, "Researcher token for --server")->envname("AGORA_RESEARCHER_TOKEN");

    // export
    auto* exp = app.add_subcommand("export", "Write a session's raw log or flattened CSV");
    std::string session, log_file, out, export_format = "raw";
    exp->add_option("--session", session)->required();
    exp->add_option("--format", export_format)->check(CLI::IsMember({"raw", "flattened"}));
    exp->add_option("-o,--out", out);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Per-participant metrics of a session log");
    std::string participant, analyze_export;
    analyze->add_option("--session", session);
    analyze->add_option("--log", log_file, "A log file instead of a stored session")->check(CLI::ExistingFile);
    analyze->add_option("--participant", participant);
    analyze->add_option("--export", analyze_export, "csv or json instead of the text report")
        ->check(CLI::IsMember({"csv", "json"}));
    analyze->add_option("-o,--out", out);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run an all-agent session on a virtual clock");
    int agents = 6;
    std::uint64_t sim_seed = 1;
    int messages = 2;
    simulate->add_option("--config", config_file)->check(CLI::ExistingFile);
    simulate->add_option("--template", template_id);
    simulate->add_option("--controls", controls_arg);
    simulate->add_option("--param", params);
    simulate->add_option("--agents", agents)->check(CLI::Range(2, 64));
    simulate->add_option("--seed", sim_seed);
    simulate->add_option("--messages", messages, "Chat messages each scripted agent sends");
    simulate->add_option("-o,--out", out, "Write the session log here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return run_validate(ecl_file, ecl_json);
        if (format->parsed()) {
            std::cout << ecl::serialize_config(ecl::load_config_file(ecl_file));
            return 0;
        }

        auto options = service::ServiceOptions::from_env(asset_dir);
        options.data_dir = data_dir;

        if (serve->parsed()) {
            options.researcher_token = token;
            if (llm) options.agent_mode = service::AgentMode::Llm;
            return run_serve(std::move(options), host, port);
        }

        if (create->parsed()) {
            json body = {{"parameters", parse_params(params)}, {"require_all_humans", !no_require}};
            if (!config_file.empty()) body["config_ecl"] = service::read_file(config_file);
            else
                body["template"] = template_id;
            if (!controls_arg.empty())
                body["controls"] = fs::exists(controls_arg) ? json::parse(service::read_file(controls_arg)) : json(controls_arg);
            if (seed) body["seed"] = *seed;
            if (!server.empty()) {
                httplib::Client cli(server);
                auto res = cli.Post("/api/sessions", {{"Authorization", "Bearer " + token}}, body.dump(), "application/json");
                if (!res) {
                    std::cerr << "cannot reach " << server << "\n";
                    return 1;
                }
                if (res->status != 201) {
                    std::cerr << res->body << "\n";
                    return 1;
                }
                std::cout << json::parse(res->body)["session_id"].get<std::string>() << "\n";
                return 0;
            }
            options.timer_period = Duration{0};
            options.run_agents = false;
            service::SessionService svc(options);
            std::cout << svc.create_session(service::create_request_from_json(body, svc.personas())) << "\n";
            return 0;
        }

        if (exp->parsed()) {
            auto log = service::read_log(fs::path(data_dir) / "sessions" / session / "events.jsonl");
            write_out(out, export_format == "raw" ? service::read_file(fs::path(data_dir) / "sessions" / session / "events.jsonl")
                                                  : analysis::rows_to_csv(analysis::flatten(log.header, log.events)));
            return 0;
        }

        if (analyze->parsed()) {
            auto log = load_session_log(log_file, data_dir, session);
            std::optional<std::string> who;
            if (!participant.empty()) who = participant;
            if (analyze_export == "csv") {
                auto metrics = analysis::compute_metrics(log.header, log.events);
                if (who) std::erase_if(metrics, [&](auto& m) { return m.participant_id != *who; });
                write_out(out, analysis::metrics_to_csv(metrics));
            } else {
                auto report = analysis::summarize_session(log.header, log.events, who);
                write_out(out, analyze_export == "json" ? report.dump(2) + "\n" : analysis::render_report(report));
            }
            return 0;
        }

        if (simulate->parsed()) {
            const auto assets = fs::path(asset_dir);
            const auto text = !config_file.empty() ? service::read_file(config_file)
                                                   : service::read_file(assets / "paradigms" / (template_id + ".ecl"));
            auto cfg = ecl::compile_or_throw(text);
            const auto overrides = parse_params(params);
            for (auto& [name, v] : overrides.items()) {
                auto type = ecl::known_parameter_type(name);
                if (!type) throw Error(ErrorCode::InvalidConfig, "unknown parameter " + name);
                cfg.parameters.set(name, ecl::parse_literal(v.get<std::string>(), TypeSpec::of(*type)));
            }
            sim::SimulationOptions so;
            so.config = std::make_shared<const ecl::ExperimentConfig>(ecl::compile_or_throw(ecl::serialize_config(cfg)));
            so.controls = load_controls(controls_arg, assets);
            so.roster = sim::agent_roster(agents);
            so.seed = sim_seed;
            so.script.messages = messages;
            auto result = sim::simulate(so);
            if (!out.empty()) {
                std::string jsonl = engine::header_to_json(result.header).dump() + "\n";
                for (auto& e : result.events) jsonl += engine::event_to_json(e).dump() + "\n";
                write_out(out, jsonl);
            }
            std::cout << analysis::render_report(analysis::summarize_session(result.header, result.events, std::nullopt));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (auto* r = dynamic_cast<const service::RequestError*>(&e)) std::cerr << r->details().dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
