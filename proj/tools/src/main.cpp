#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecosafe/error.hpp"
#include "ecosafe/pcc.hpp"
#include "ecosafe/road.hpp"
#include "ecosafe/scenario.hpp"
#include "ecosafe/sim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCollision = 2;

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ecosafe::ConfigError("cannot write " + path.string());
    }
    return out;
}

ecosafe::RunLog read_log(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ecosafe::ConfigError("cannot read " + path.string());
    }
    return ecosafe::read_run_csv(in);
}

struct SolveArgs {
    std::string road;
    std::string scenario;
    std::string out;
    double v0 = 20.0;
    double vf = 20.0;
    double t_max = 150.0;
    double v_min = 2.5;
    double v_max = 32.0;
    ecosafe::SolverSettings settings;
};

ecosafe::OcpSpec solve_spec(const SolveArgs& a) {
    if (!a.scenario.empty()) {
        const auto cfg = ecosafe::load_scenario(a.scenario);
        return {ecosafe::build_road(cfg.road), cfg.truck, cfg.pcc.v0, cfg.pcc.vf, cfg.pcc.t_max, cfg.pcc.settings};
    }
    std::ifstream in(a.road);
    if (!in) {
        throw ecosafe::ConfigError("cannot read " + a.road);
    }
    auto road = ecosafe::ingest_elevation_csv(in, ecosafe::SpeedLimits::uniform(a.v_min, a.v_max));
    return {std::move(road), {}, a.v0, a.vf, a.t_max, a.settings};
}

int cmd_solve(const SolveArgs& a) {
    const auto spec = solve_spec(a);
    const auto profile = ecosafe::solve(spec);
    if (a.out.empty()) {
        ecosafe::write_profile_csv(std::cout, profile);
    } else {
        auto out = open_out(a.out);
        ecosafe::write_profile_csv(out, profile);
    }
    std::cerr << "energy " << profile.objective() << " J/kg, travel time " << profile.travel_time << " s\n";
    return kExitOk;
}

struct RunArgs {
    std::string scenario;
    std::string out;
    std::string summary;
    std::string baseline;
};

int cmd_run(const RunArgs& a) {
    auto log = ecosafe::run(ecosafe::load_scenario(a.scenario));
    if (!a.baseline.empty()) {
        const auto base = read_log(a.baseline);
        log.summary = ecosafe::summarize(log, &base);
    }
    if (!a.out.empty()) {
        auto out = open_out(a.out);
        ecosafe::write_run_csv(out, log);
    }
    if (!a.summary.empty()) {
        auto out = open_out(a.summary);
        ecosafe::write_summary_json(out, log.summary);
    } else {
        ecosafe::write_summary_json(std::cout, log.summary);
    }
    if (log.summary.collision) {
        std::cerr << "collision: minimum headway " << log.summary.min_headway << " m\n";
        return kExitCollision;
    }
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& logs) {
    std::vector<ecosafe::RunLog> runs;
    for (const auto& path : logs) {
        runs.push_back(read_log(path));
    }
    const auto& base = runs.front();
    std::cout << std::left << std::setw(32) << "run" << std::right << std::setw(14) << "energy[J/kg]"
              << std::setw(12) << "finish[s]" << std::setw(14) << "min_gap[m]" << std::setw(10) << "switches"
              << std::setw(12) << "saving[%]" << '\n';
    std::cout << std::fixed;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto s = ecosafe::summarize(runs[i], &base);
        std::cout << std::left << std::setw(32) << fs::path(logs[i]).filename().string() << std::right
                  << std::setprecision(1) << std::setw(14) << s.final_energy << std::setw(12) << s.finish_time
                  << std::setw(14);
        if (std::isfinite(s.min_headway)) {
            std::cout << s.min_headway;
        } else {
            std::cout << "inf";
        }
        std::cout << std::setw(10) << s.switch_count << std::setprecision(2) << std::setw(12) << *s.saving_pct
                  << '\n';
    }
    return kExitOk;
}

struct GenRoadArgs {
    std::string kind = "two-hill";
    double length = 3000.0;
    double step = 2.5;
    double height = 10.0;
    std::string out;
};

int cmd_gen_road(const GenRoadArgs& a) {
    const auto samples =
        ecosafe::synthetic_elevation(ecosafe::parse_synthetic_road(a.kind), a.length, a.step, a.height);
    if (a.out.empty()) {
        ecosafe::write_elevation_csv(std::cout, samples);
    } else {
        auto out = open_out(a.out);
        ecosafe::write_elevation_csv(out, samples);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safe, energy-efficient longitudinal control toolkit for connected trucks"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve the energy-optimal speed profile for a road");
    auto* road_opt = solve->add_option("--road", solve_args.road, "Elevation CSV (s,E)")->check(CLI::ExistingFile);
    auto* scen_opt =
        solve->add_option("--scenario", solve_args.scenario, "Take road and solver settings from a scenario")
            ->check(CLI::ExistingFile);
    road_opt->excludes(scen_opt);
    solve->add_option("--v0", solve_args.v0, "Initial speed [m/s]")->capture_default_str();
    solve->add_option("--vf", solve_args.vf, "Final speed [m/s]")->capture_default_str();
    solve->add_option("--t-max", solve_args.t_max, "Travel-time budget [s]")->capture_default_str();
    solve->add_option("--v-min", solve_args.v_min, "Lower speed limit [m/s]")->capture_default_str();
    solve->add_option("--v-max", solve_args.v_max, "Upper speed limit [m/s]")->capture_default_str();
    solve->add_option("--ds", solve_args.settings.ds, "Spatial step [m]")->capture_default_str();
    solve->add_option("--speed-step", solve_args.settings.speed_step, "Speed grid step [m/s]")
        ->capture_default_str();
    solve->add_option("--time-tolerance", solve_args.settings.time_tolerance, "Travel-time slack [s]")
        ->capture_default_str();
    solve->add_option("-o,--out", solve_args.out, "Profile CSV (stdout if omitted)");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Simulate a scenario");
    run->add_option("--scenario", run_args.scenario, "Scenario YAML")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", run_args.out, "Run log CSV");
    run->add_option("--summary", run_args.summary, "Summary JSON (stdout if omitted)");
    run->add_option("--baseline", run_args.baseline, "Baseline run log CSV for the saving figure")
        ->check(CLI::ExistingFile);

    std::vector<std::string> compare_logs;
    auto* compare = app.add_subcommand("compare", "Compare run logs against the first one");
    compare->add_option("logs", compare_logs, "Run log CSVs; the first is the baseline")
        ->required()
        ->expected(2, -1)
        ->check(CLI::ExistingFile);

    GenRoadArgs gen_args;
    auto* gen = app.add_subcommand("gen-road", "Write a synthetic elevation CSV");
    gen->add_option("--kind", gen_args.kind, "flat | hill | two-hill | hill-valley")->capture_default_str();
    gen->add_option("--length", gen_args.length, "Road length [m]")->capture_default_str();
    gen->add_option("--step", gen_args.step, "Sample spacing [m]")->capture_default_str();
    gen->add_option("--height", gen_args.height, "Feature height [m]")->capture_default_str();
    gen->add_option("-o,--out", gen_args.out, "Output CSV (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            if (solve_args.road.empty() && solve_args.scenario.empty()) {
                std::cerr << "solve: one of --road or --scenario is required\n";
                return kExitInvalid;
            }
            return cmd_solve(solve_args);
        }
        if (*run) {
            return cmd_run(run_args);
        }
        if (*compare) {
            return cmd_compare(compare_logs);
        }
        return cmd_gen_road(gen_args);
    } catch (const ecosafe::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << " (minimum achievable time " << e.min_achievable_time()
                  << " s)\n";
    } catch (const ecosafe::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kExitInvalid;
}
