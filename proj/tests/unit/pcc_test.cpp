#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ecosafe/error.hpp"
#include "ecosafe/pcc.hpp"
#include "oracles.hpp"
#include "pcc_reference.hpp"

namespace ecosafe {
namespace {

const oracle::Truck kRef{};

RoadProfile flat_road(double length, double v_min, double v_max) {
    return RoadProfile::from_elevation({{0.0, 0.0}, {length, 0.0}}, SpeedLimits::uniform(v_min, v_max), 1);
}

// Independent re-check of every constraint of the planning problem.
void expect_feasible(const OcpSpec& spec, const OptimalProfile& p) {
    const std::size_t n = p.s.size();
    ASSERT_EQ(p.v.size(), n);
    ASSERT_EQ(p.u_dr.size(), n);
    ASSERT_EQ(p.u_br.size(), n);
    ASSERT_EQ(p.energy.size(), n);
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_GE(p.v[i], spec.road.v_min_at(p.s[i]) - 1e-9) << "node " << i;
        EXPECT_LE(p.v[i], spec.road.v_max_at(p.s[i]) + 1e-9) << "node " << i;
        EXPECT_GE(p.u_dr[i], 0.0);
        EXPECT_LE(p.u_br[i], 0.0);
        EXPECT_EQ(p.u_dr[i] * p.u_br[i], 0.0);
        if (i + 1 < n) {
            const double ds = p.s[i + 1] - p.s[i];
            const double u_hat = p.u_dr[i] + p.u_br[i];
            EXPECT_LE(u_hat, kRef.drive_cap(std::max(p.v[i], p.v[i + 1])) + 1e-12) << "node " << i;
            EXPECT_GE(u_hat, -kRef.brake_max - 1e-12);
            // Work-energy balance over the cell with midpoint slope and mean drag.
            const double phi = spec.road.slope_at(0.5 * (p.s[i] + p.s[i + 1]));
            const double expected = (p.v[i + 1] * p.v[i + 1] - p.v[i] * p.v[i]) / (2.0 * ds) + kRef.resistance(phi) +
                                    0.5 * (kRef.drag(p.v[i]) + kRef.drag(p.v[i + 1]));
            EXPECT_NEAR(u_hat, expected, 1e-9) << "node " << i;
            w += p.u_dr[i] * ds;
            EXPECT_NEAR(p.energy[i + 1], w, 1e-9 * std::max(1.0, w));
        }
    }
    EXPECT_LE(std::abs(p.v.front() - spec.v0), spec.settings.speed_step);
    EXPECT_LE(std::abs(p.v.back() - spec.vf), spec.settings.speed_step);
    EXPECT_LE(p.travel_time, spec.t_max + 0.1);
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        t += 0.5 * (p.s[i + 1] - p.s[i]) * (1.0 / p.v[i] + 1.0 / p.v[i + 1]);
    }
    EXPECT_NEAR(p.travel_time, t, 1e-9);
}

TEST(Solve, FlatRoadCruisesAtAverageSpeed) {
    OcpSpec spec{flat_road(1000.0, 15.0, 32.0), {}, 20.0, 20.0, 50.0, {}};
    spec.settings.time_tolerance = 1e-9;
    const auto p = solve(spec);
    expect_feasible(spec, p);
    for (double v : p.v) {
        EXPECT_NEAR(v, 20.0, 1e-9);
    }
    const double analytic = (kRef.resistance(0.0) + kRef.drag(20.0)) * 1000.0;
    EXPECT_NEAR(p.objective(), analytic, 1e-9 * analytic);
    EXPECT_NEAR(p.travel_time, 50.0, 1e-9);
}

TEST(Solve, InfeasibleBudgetReportsMinimumTime) {
    OcpSpec spec{flat_road(1000.0, 15.0, 25.0), {}, 20.0, 20.0, 30.0, {}};
    try {
        (void)solve(spec);
        FAIL() << "expected an infeasibility error";
    } catch (const InfeasibleError& e) {
        EXPECT_NEAR(e.min_achievable_time(), 40.0, 1e-9);
    }
}

TEST(Solve, PowerLimitedBudgetReportsAchievableTime) {
    // 40 s is reachable at the speed limit but not under the power cap.
    OcpSpec spec{flat_road(1000.0, 15.0, 32.0), {}, 20.0, 20.0, 32.0, {}};
    try {
        (void)solve(spec);
        FAIL() << "expected an infeasibility error";
    } catch (const InfeasibleError& e) {
        EXPECT_GT(e.min_achievable_time(), 32.0);
        EXPECT_TRUE(std::isfinite(e.min_achievable_time()));
    }
}

TEST(Solve, MalformedSpecs) {
    OcpSpec spec{flat_road(500.0, 15.0, 25.0), {}, 20.0, 20.0, 40.0, {}};
    auto bad = spec;
    bad.settings.ds = 0.0;
    EXPECT_THROW((void)solve(bad), MalformedSpecError);
    bad = spec;
    bad.settings.speed_step = -1.0;
    EXPECT_THROW((void)solve(bad), MalformedSpecError);
    bad = spec;
    bad.v0 = 30.0;
    EXPECT_THROW((void)solve(bad), MalformedSpecError);
    bad = spec;
    bad.vf = 10.0;
    EXPECT_THROW((void)solve(bad), MalformedSpecError);
    bad = spec;
    bad.settings.max_span = 0;
    EXPECT_THROW((void)solve(bad), MalformedSpecError);
}

TEST(Solve, CoastsDownSteepGrade) {
    std::vector<ElevationSample> e;
    for (double s = 0.0; s <= 2000.0; s += 2.5) {
        const double drop = std::clamp(s - 500.0, 0.0, 1000.0);
        e.push_back({s, -0.05 * drop});
    }
    OcpSpec spec{RoadProfile::from_elevation(e, SpeedLimits::uniform(10.0, 32.0)), {}, 20.0, 20.0, 120.0, {}};
    const auto p = solve(spec);
    expect_feasible(spec, p);
    for (std::size_t i = 0; i < p.s.size(); ++i) {
        if (p.s[i] > 525.0 && p.s[i] < 1475.0) {
            EXPECT_EQ(p.u_dr[i], 0.0) << "s = " << p.s[i];
        }
    }
}

TEST(Solve, FeasibleOnHillyRoadAndDeterministic) {
    const auto road = oracle::random_road(5, 1500.0, 2.5, 12.0, SpeedLimits::uniform(12.0, 25.0));
    OcpSpec spec{road, {}, 18.0, 18.0, 85.0, {}};
    const auto a = solve(spec);
    expect_feasible(spec, a);
    const auto b = solve(spec);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.u_dr, b.u_dr);
    EXPECT_EQ(a.objective(), b.objective());
}

TEST(Solve, EnergyOfTrajectoryMatchesObjective) {
    const auto road = oracle::random_road(9, 1200.0, 2.5, 10.0, SpeedLimits::uniform(10.0, 25.0));
    OcpSpec spec{road, {}, 15.0, 18.0, 70.0, {}};
    const auto p = solve(spec);
    const auto traj = profile_trajectory(p);
    const auto w = energy(traj);
    EXPECT_NEAR(w.back(), p.objective(), 1e-6 * p.objective());
}

TEST(Solve, ExploitsGravityOnHillAndValley) {
    const auto samples = synthetic_elevation(SyntheticRoad::hill_valley, 3000.0, 2.5, 8.0);
    OcpSpec spec{RoadProfile::from_elevation(samples, SpeedLimits::uniform(15.0, 25.0)), {}, 20.0, 20.0, 155.0, {}};
    const auto p = solve(spec);
    expect_feasible(spec, p);

    // Best feasible constant-speed profile on the same cells.
    const auto grid = oracle::grid_problem(spec);
    double best_constant = std::numeric_limits<double>::infinity();
    for (double v : grid.speeds) {
        const double time = spec.road.length() / v;
        if (time > spec.t_max) {
            continue;
        }
        double work = 0.0;
        bool ok = true;
        for (double res : grid.resistance) {
            const double u = res + kRef.drag(v);
            ok = ok && u <= kRef.drive_cap(v) && u >= -kRef.brake_max;
            work += std::max(u, 0.0) * grid.ds;
        }
        if (ok) {
            best_constant = std::min(best_constant, work);
        }
    }
    ASSERT_TRUE(std::isfinite(best_constant));
    EXPECT_LT(p.objective(), best_constant);
}

TEST(Solve, MatchesConstrainedOracleOnSmallRoads) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto road = oracle::random_road(seed, 300.0, 2.5, 4.0, SpeedLimits::uniform(8.0, 14.0));
        OcpSpec spec{road, {}, 11.0, 11.0, 300.0 / 11.0 + 0.5, {}};
        spec.settings.speed_step = 0.5;
        spec.settings.time_tolerance = 0.05;
        const auto p = solve(spec);
        const auto ref = oracle::constrained_optimum(oracle::grid_problem(spec), p.objective());
        ASSERT_TRUE(ref.has_value());
        EXPECT_GE(p.objective(), *ref - 1e-9);
        EXPECT_LE(p.objective(), *ref * 1.01) << "seed " << seed;
    }
}

TEST(Oracle, LabelSearchAgreesWithEnumeration) {
    const auto road = oracle::random_road(4, 25.0, 2.5, 0.5, SpeedLimits::uniform(8.0, 10.0));
    OcpSpec spec{road, {}, 9.0, 9.0, 2.85, {}};
    spec.settings.speed_step = 0.5;
    spec.settings.max_span = 3;
    auto grid = oracle::grid_problem(spec);
    const auto brute = oracle::brute_force_optimum(grid);
    const auto labels = oracle::constrained_optimum(grid);
    ASSERT_TRUE(brute.has_value());
    ASSERT_TRUE(labels.has_value());
    EXPECT_NEAR(*brute, *labels, 1e-9);
}

TEST(Energy, TrapezoidOfDrivePower) {
    std::vector<TrajectorySample> hold;
    for (int k = 0; k <= 100; ++k) {
        hold.push_back({static_cast<double>(k), 30.0, 0.4353});
    }
    EXPECT_NEAR(energy(hold).back(), 1305.9, 1e-9);

    std::vector<TrajectorySample> coast{{0.0, 20.0, 0.0}, {1.0, 19.0, 0.0}, {2.0, 18.0, 0.0}};
    EXPECT_EQ(energy(coast).back(), 0.0);

    const std::vector<TrajectorySample> single{{3.0, 10.0, 1.0}};
    EXPECT_EQ(energy(single), std::vector<double>{0.0});
}

TEST(Energy, NonDecreasingAndRejectsTimeReversal) {
    std::vector<TrajectorySample> traj;
    for (int k = 0; k < 50; ++k) {
        traj.push_back({0.1 * k, 10.0 + std::sin(k), std::max(0.0, std::cos(k))});
    }
    const auto w = energy(traj);
    EXPECT_TRUE(std::is_sorted(w.begin(), w.end()));
    traj[10].t = traj[9].t - 0.01;
    EXPECT_THROW((void)energy(traj), MalformedTrajectoryError);
}

TEST(UDrFromAccel, HandValues) {
    const TruckParams p{};
    EXPECT_NEAR(u_dr_from_accel(p, 0.0, 30.0, 0.5), 0.9353, 5e-5);
    EXPECT_EQ(u_dr_from_accel(p, 0.0, 30.0, -2.0), 0.0);
    const double coast = -(kRef.resistance(0.01) + kRef.drag(25.0));
    EXPECT_NEAR(u_dr_from_accel(p, 0.01, 25.0, coast), 0.0, 1e-15);
}

TEST(TravelTime, Trapezoid) {
    const std::vector<double> s{0.0, 1500.0, 3000.0};
    const std::vector<double> v{20.0, 20.0, 20.0};
    EXPECT_DOUBLE_EQ(travel_time(s, v), 150.0);
    const std::vector<double> s2{0.0, 1500.0, 1500.0, 3000.0};
    const std::vector<double> v2{20.0, 20.0, 30.0, 30.0};
    EXPECT_DOUBLE_EQ(travel_time(s2, v2), 125.0);
    const std::vector<double> s3{0.0, 2.5};
    const std::vector<double> v3{10.0, 10.0};
    EXPECT_DOUBLE_EQ(travel_time(s3, v3), 0.25);
    const std::vector<double> v4{10.0, 0.0};
    EXPECT_THROW((void)travel_time(s3, v4), DivisionHazardError);
}

TEST(ProfileCsv, HeaderAndRows) {
    OcpSpec spec{flat_road(10.0, 15.0, 25.0), {}, 20.0, 20.0, 1.0, {}};
    const auto p = solve(spec);
    std::stringstream out;
    write_profile_csv(out, p);
    std::string line;
    std::getline(out, line);
    EXPECT_EQ(line, "s,v_pcc,u_dr,u_br,w");
    int rows = 0;
    while (std::getline(out, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, static_cast<int>(p.s.size()));
}

TEST(OptimalProfile, SpeedAtInterpolates) {
    OptimalProfile p;
    p.s = {0.0, 10.0, 20.0};
    p.v = {10.0, 20.0, 20.0};
    EXPECT_EQ(p.speed_at(-5.0), 10.0);
    EXPECT_EQ(p.speed_at(5.0), 15.0);
    EXPECT_EQ(p.speed_at(25.0), 20.0);
}

} // namespace
} // namespace ecosafe
