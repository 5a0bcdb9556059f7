// Simulates a sweep of seeds under every bundled controls preset, then times
// batch analysis of the resulting logs serially and with OpenMP.
#include <chrono>
#include <filesystem>
#include <iostream>

#include <omp.h>

#include <CLI11.hpp>

#include "agora/analysis/metrics.hpp"
#include "agora/ecl/parser.hpp"
#include "agora/sim/simulator.hpp"

using namespace agora;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agora sweep benchmark"};
    int seeds = 16;
    std::string assets = AGORA_DEFAULT_ASSET_DIR;
    app.add_option("--seeds", seeds, "Seeds per controls preset");
    app.add_option("--assets", assets);
    CLI11_PARSE(app, argc, argv);

    auto config = std::make_shared<const ecl::ExperimentConfig>(
        ecl::load_config_file(fs::path(assets) / "paradigms" / "shape_factory.ecl"));
    std::vector<std::pair<std::string, controls::InteractionControls>> presets;
    for (auto& f : fs::directory_iterator(fs::path(assets) / "controls"))
        presets.emplace_back(f.path().stem().string(), controls::load_controls_file(f.path().string()));
    std::sort(presets.begin(), presets.end(), [](auto& a, auto& b) { return a.first < b.first; });

    const int n = static_cast<int>(presets.size()) * seeds;
    std::vector<analysis::LogInput> logs(n);
    std::size_t total_events = 0;
    const auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic) reduction(+ : total_events)
    for (int i = 0; i < n; ++i) {
        sim::SimulationOptions o;
        o.config = config;
        o.controls = presets[i / seeds].second;
        o.roster = sim::agent_roster(6);
        o.seed = static_cast<std::uint64_t>(i % seeds + 1);
        o.session_id = presets[i / seeds].first + "-" + std::to_string(o.seed);
        auto r = sim::simulate(o);
        total_events += r.events.size();
        logs[i] = {std::move(r.header), std::move(r.events)};
    }
    const double sim_s = seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    auto serial = analysis::summarize_batch(logs, false);
    const double serial_s = seconds_since(t1);
    t1 = std::chrono::steady_clock::now();
    auto parallel = analysis::summarize_batch(logs, true);
    const double parallel_s = seconds_since(t1);

    std::cout << "threads            " << omp_get_max_threads() << "\n"
              << "sessions           " << n << " (" << presets.size() << " presets x " << seeds << " seeds)\n"
              << "events             " << total_events << "\n"
              << "simulate           " << sim_s << " s (" << total_events / std::max(sim_s, 1e-9) << " events/s)\n"
              << "analyze serial     " << serial_s << " s\n"
              << "analyze parallel   " << parallel_s << " s\n"
              << "results identical  " << (serial == parallel ? "yes" : "NO") << "\n";
    return serial == parallel ? 0 : 1;
}
