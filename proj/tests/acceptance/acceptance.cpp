// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ecosafe/cbf.hpp"
#include "ecosafe/controllers.hpp"
#include "ecosafe/pcc.hpp"
#include "ecosafe/road.hpp"
#include "ecosafe/scenario.hpp"
#include "ecosafe/sim.hpp"
#include "oracles.hpp"
#include "pcc_reference.hpp"

using namespace ecosafe;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string scenario_path(const char* name) {
    return std::string(ECOSAFE_SCENARIO_DIR) + "/" + name;
}

// Random leader speed with |a1| <= 3 m/s^2 and speed in [0, 32] m/s,
// piecewise linear with 1 s knots.
std::vector<double> random_leader(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> speed(0.0, 32.0);
    std::uniform_real_distribution<double> accel(-3.0, 3.0);
    std::vector<double> knots{speed(gen)};
    for (int k = 0; k < 61; ++k) {
        knots.push_back(std::clamp(knots.back() + accel(gen), 0.0, 32.0));
    }
    return knots;
}

Outcome forward_invariance() {
    const CriticalDistance rho{};
    const double v_bar = 32.0;
    std::mt19937_64 gen(1001);
    std::vector<std::vector<double>> leaders;
    for (int i = 0; i < 10; ++i) {
        leaders.push_back(random_leader(gen));
    }
    std::uniform_real_distribution<double> speed(0.0, v_bar);
    std::uniform_real_distribution<double> slack(0.0, 50.0);
    const FollowControl control = [&rho](const FollowState& x) { return safe_input(barrier_eval(rho, x), 1.0); };
    double worst = std::numeric_limits<double>::infinity();
    int runs = 0;
    for (int i = 0; i < 200; ++i) {
        const double v = speed(gen);
        const double h = rho(v, 0.0) + (i < 100 ? 0.0 : slack(gen));
        for (const auto& knots : leaders) {
            const LeaderSpeed leader = [&knots](double t) {
                const auto j = std::min<std::size_t>(static_cast<std::size_t>(t), knots.size() - 2);
                const double f = std::clamp(t - static_cast<double>(j), 0.0, 1.0);
                return knots[j] + f * (knots[j + 1] - knots[j]);
            };
            FollowState x{h, v, leader(0.0)};
            for (int k = 0; k < 6000; ++k) {
                x = car_following_step(x, 0.01 * k, 0.01, control, leader);
                worst = std::min(worst, barrier_eval(rho, x).value);
            }
            ++runs;
        }
    }
    const double bound = -1e-6 * (1.0 + rho.time_headway * v_bar);
    return {worst >= bound, fmt("%d runs, min b = %.3e m (bound %.3e)", runs, worst, bound)};
}

Outcome qp_equivalence() {
    std::mt19937_64 gen(2002);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double worst = 0.0;
    int n = 0;
    while (n < 1000) {
        BarrierState bs;
        bs.value = u(gen);
        bs.drift = u(gen);
        bs.input_gain = u(gen);
        if (std::abs(bs.input_gain) < 1e-3) {
            continue;
        }
        const double nominal = u(gen);
        const double decay = 0.1 + std::abs(u(gen)) / 5.0;
        worst = std::max(worst, std::abs(qp_filter(bs, nominal, decay) -
                                         oracle::bisection_qp(bs.value, bs.drift, bs.input_gain, decay, nominal)));
        ++n;
    }
    return {worst <= 1e-8, fmt("%d samples, max |diff| = %.2e m/s^2", n, worst)};
}

Outcome filter_safety() {
    const auto base = load_scenario(scenario_path("stop_and_go.yaml"));
    auto prepared = prepare(base);
    double worst = std::numeric_limits<double>::infinity();
    int runs = 0;
    const auto original = base.leaders;
    for (const ControllerSet set : {ControllerSet{false, true, true}, ControllerSet{true, true, true}}) {
        prepared.config.controllers = set;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            for (std::size_t i = 0; i < original.size(); ++i) {
                prepared.config.leaders[i] = perturb(original[i], seed, 0.1);
            }
            worst = std::min(worst, run(prepared).summary.min_headway);
            ++runs;
        }
    }
    return {worst > 0.0, fmt("%d runs, min headway = %.3f m", runs, worst)};
}

Outcome energy_ordering() {
    auto prepared = prepare(load_scenario(scenario_path("highway_two_hill.yaml")));
    prepared.config.controllers = {false, false, true};
    const auto pcc = run(prepared).summary;
    prepared.config.controllers = {true, true, true};
    const auto filter = run(prepared).summary;
    prepared.config.controllers = {false, true, false};
    const auto ccc = run(prepared).summary;
    const double t_ref = filter.finish_time;
    const bool matched = std::abs(pcc.finish_time - t_ref) <= 0.02 * t_ref &&
                         std::abs(ccc.finish_time - t_ref) <= 0.02 * t_ref;
    const bool ordered = pcc.final_energy <= filter.final_energy && filter.final_energy < ccc.final_energy;
    const bool safe = !filter.collision && !ccc.collision;
    return {matched && ordered && safe && filter.switch_count >= 1,
            fmt("w PCC %.2f, filter %.2f, CCC %.2f J/kg; finish %.1f/%.1f/%.1f s; saving %.2f%%; %d switches",
                pcc.final_energy, filter.final_energy, ccc.final_energy, pcc.finish_time, filter.finish_time,
                ccc.finish_time, energy_saving_pct(filter.final_energy, ccc.final_energy), filter.switch_count)};
}

Outcome flat_optimum() {
    const oracle::Truck truck;
    const auto road =
        RoadProfile::from_elevation({{0.0, 0.0}, {3000.0, 0.0}}, SpeedLimits::uniform(15.0, 32.0), 1);
    OcpSpec spec{road, {}, 20.0, 20.0, 150.0, {}};
    const auto p = solve(spec);
    const double analytic = (truck.resistance(0.0) + truck.drag(20.0)) * 3000.0;
    const double rel = std::abs(p.objective() - analytic) / analytic;
    double worst_speed = 0.0;
    const std::size_t layer = 10;
    for (std::size_t i = layer; i + layer < p.v.size(); ++i) {
        worst_speed = std::max(worst_speed, std::abs(p.v[i] - 20.0));
    }
    return {rel <= 0.005 && worst_speed <= spec.settings.speed_step + 1e-9,
            fmt("w = %.3f J/kg vs %.3f (rel %.2e), max |v - 20| = %.3f m/s", p.objective(), analytic, rel,
                worst_speed)};
}

Outcome oracle_dominance() {
    double worst = 0.0;
    bool ok = true;
    for (std::uint64_t seed = 11; seed <= 15; ++seed) {
        const auto road = oracle::random_road(seed, 500.0, 2.5, 5.0, SpeedLimits::uniform(8.0, 16.0));
        OcpSpec spec{road, {}, 12.0, 12.0, 500.0 / 12.0 + 1.0, {}};
        spec.settings.speed_step = 0.5;
        spec.settings.time_tolerance = 0.05;
        const auto p = solve(spec);
        const auto ref = oracle::constrained_optimum(oracle::grid_problem(spec), p.objective());
        if (!ref) {
            return {false, fmt("seed %d: no grid path costs as little as the solver's %.4f J/kg",
                               static_cast<int>(seed), p.objective())};
        }
        const double rel = (p.objective() - *ref) / *ref;
        worst = std::max(worst, rel);
        ok = ok && rel <= 0.01 && p.travel_time <= spec.t_max + 1e-9;
    }
    return {ok, fmt("5 roads x 200 cells, worst excess over oracle %.3f%%", 100.0 * worst)};
}

Outcome downhill_coasting() {
    std::vector<ElevationSample> e;
    for (double s = 0.0; s <= 2000.0; s += 2.5) {
        e.push_back({s, -0.05 * std::clamp(s - 500.0, 0.0, 1000.0)});
    }
    OcpSpec spec{RoadProfile::from_elevation(e, SpeedLimits::uniform(10.0, 32.0)), {}, 20.0, 20.0, 120.0, {}};
    const auto p = solve(spec);
    int nonzero = 0;
    int interior = 0;
    for (std::size_t i = 0; i < p.s.size(); ++i) {
        if (p.s[i] > 525.0 && p.s[i] < 1475.0) {
            ++interior;
            nonzero += p.u_dr[i] != 0.0 ? 1 : 0;
        }
    }
    return {nonzero == 0 && interior > 0, fmt("%d interior nodes, %d with u_dr != 0", interior, nonzero)};
}

Outcome energy_consistency() {
    double worst = 0.0;
    int logs = 0;
    for (const char* name : {"pcc_only.yaml", "stop_and_go.yaml"}) {
        const auto cfg = load_scenario(scenario_path(name));
        const auto log = run(cfg);
        std::vector<TrajectorySample> traj;
        const auto& r = log.records;
        for (std::size_t k = 0; k < r.size(); ++k) {
            const double v_dot = k + 1 < r.size() ? (r[k + 1].v - r[k].v) / log.dt
                                 : k > 0          ? (r[k].v - r[k - 1].v) / log.dt
                                                  : 0.0;
            traj.push_back({r[k].t, r[k].v, u_dr_from_accel(cfg.truck, r[k].phi, r[k].v, v_dot)});
        }
        const auto w = energy(traj);
        for (std::size_t k = 0; k < r.size(); ++k) {
            worst = std::max(worst, std::abs(w[k] - r[k].w) / std::max(1.0, std::abs(r[k].w)));
        }
        ++logs;
    }
    return {worst <= 1e-6, fmt("%d logs, max relative deviation %.2e", logs, worst)};
}

Outcome slope_round_trip() {
    const double k = 2.0 * std::numbers::pi / 500.0;
    std::vector<ElevationSample> samples;
    for (int i = 0; i <= 1200; ++i) {
        const double s = 2.5 * i;
        samples.push_back({s, 2.0 * std::sin(k * s)});
    }
    const auto phi = slope_from_elevation(samples);
    double worst = 0.0;
    const std::size_t edge = static_cast<std::size_t>(kDefaultSmoothingWindow / 2) + 1;
    for (std::size_t i = edge; i + edge < phi.size(); ++i) {
        worst = std::max(worst, std::abs(phi[i] - std::asin(2.0 * k * std::cos(k * samples[i].s))));
    }
    return {worst < 1e-3, fmt("max slope error %.2e rad (window %d)", worst, kDefaultSmoothingWindow)};
}

Outcome branch_boundaries() {
    int checks = 0;
    int failures = 0;
    auto expect = [&](double got, double want) {
        ++checks;
        failures += got == want ? 0 : 1;
    };
    for (const auto& p : {CccParams::highway(), CccParams::on_track()}) {
        const double h_st = p.stop_distance;
        const double h_go = p.stop_distance + p.speed_limit / p.range_gradient;
        const double h_cc = h_go + p.cruise_margin;
        expect(range_policy(p, h_st), 0.0);
        expect(range_policy(p, h_go), p.speed_limit);
        expect(range_policy(p, h_cc), p.speed_limit);
        expect(gain_range(p, h_st), p.gain_range);
        expect(gain_range(p, h_go), p.gain_range);
        expect(gain_range(p, h_cc), p.gain_range);
        expect(gain_range(p, std::nextafter(h_cc, 1e9)), p.gain_cruise);
        expect(gain_relative(p, h_st), p.gain_relative);
        expect(gain_relative(p, h_go), p.gain_relative);
        expect(gain_relative(p, h_cc), 0.0);
    }
    return {failures == 0, fmt("%d branch values, %d mismatches", checks, failures)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s; // runtime limit, <= 0 for none
    std::function<Outcome()> check;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "CBF forward invariance", 30.0, forward_invariance},
        {2, "QP filter matches bisection oracle", 1.0, qp_equivalence},
        {3, "integrated filter keeps positive headway", 60.0, filter_safety},
        {4, "energy ordering on two-hill highway", 60.0, energy_ordering},
        {5, "flat-road optimum", 10.0, flat_optimum},
        {6, "optimizer within 1% of exhaustive oracle", 30.0, oracle_dominance},
        {7, "coasting on steep downhill", 0.0, downhill_coasting},
        {8, "logged energy reproducible", 0.0, energy_consistency},
        {9, "slope round trip", 0.0, slope_round_trip},
        {10, "controller branch boundaries", 0.0, branch_boundaries},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_s <= 0.0 || secs < c.budget_s;
        const bool pass = out.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s C%d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs,
                    in_time ? "" : fmt(", over %.0f s budget", c.budget_s).c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
