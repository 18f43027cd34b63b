#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ecosafe/error.hpp"
#include "ecosafe/sim.hpp"

namespace ecosafe {
namespace {

std::string scenario_path(const char* name) {
    return std::string(ECOSAFE_SCENARIO_DIR) + "/" + name;
}

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

// Short flat road with a braking connected leader; cheap enough to run many times.
ScenarioConfig small_follow(const std::string& set) {
    return parse("dt: 0.01\nt_max: 60\ncontroller_set: " + set + R"(
road:
  synthetic: {kind: hill, length: 800, step: 2.5, height: 3}
  speed_limits: {v_min: 8, v_max: 22}
ego: {v0: 16}
pcc: {v0: 16, vf: 16, t_max: 60}
leaders:
  - gap: 35
    connected: true
    profile: [[0, 16], [8, 16], [14, 6], [22, 6], [30, 18], [60, 18]]
)");
}

TEST(Sense, BothChannelsSeeAConnectedLeader) {
    const std::vector<LeaderPose> poses{{150.0, 20.0, true}};
    const auto frame = sense(100.0, poses, SensingConfig{}, CommsMessage{150.0, 20.0, true});
    ASSERT_TRUE(frame.radar && frame.comms);
    EXPECT_EQ(frame.radar->h, 50.0);
    EXPECT_EQ(frame.comms->h, 50.0);
    EXPECT_EQ(frame.comms->v1, 20.0);
}

TEST(Sense, RadarSeesNearestCommsSeesConnected) {
    const std::vector<LeaderPose> poses{{120.0, 25.0, true}, {30.0, 12.0, false}};
    const auto frame = sense(0.0, poses, SensingConfig{}, CommsMessage{120.0, 25.0, true});
    ASSERT_TRUE(frame.radar && frame.comms);
    EXPECT_EQ(frame.radar->h, 30.0);
    EXPECT_EQ(frame.radar->v1, 12.0);
    EXPECT_EQ(frame.comms->h, 120.0);
}

TEST(Sense, OutOfRangeChannelsAreAbsent) {
    const std::vector<LeaderPose> poses{{350.0, 20.0, true}};
    const auto frame = sense(0.0, poses, SensingConfig{}, CommsMessage{350.0, 20.0, false});
    EXPECT_FALSE(frame.radar);
    EXPECT_FALSE(frame.comms);
    EXPECT_FALSE(sense(0.0, {}, SensingConfig{}, std::nullopt).radar);
}

TEST(Sense, HeldMessageUsesCurrentEgoPosition) {
    const std::vector<LeaderPose> poses{{200.0, 20.0, true}};
    const auto frame = sense(12.0, poses, SensingConfig{}, CommsMessage{198.0, 19.0, true});
    EXPECT_EQ(frame.comms->h, 186.0);
    EXPECT_EQ(frame.comms->v1, 19.0);
}

TEST(Summarize, SavingAgainstBaseline) {
    RunLog a;
    a.dt = 1.0;
    a.records.resize(2);
    a.records[0] = {};
    a.records[1].t = 1.0;
    a.records[0].v = a.records[1].v = 10.0;
    a.records[0].u_dr = a.records[1].u_dr = 635.0;
    RunLog b = a;
    b.records[0].u_dr = b.records[1].u_dr = 663.5;
    EXPECT_EQ(summarize(a, &a).saving_pct, 0.0);
    EXPECT_NEAR(*summarize(a, &b).saving_pct, 4.30, 5e-3);
    EXPECT_FALSE(summarize(a).saving_pct.has_value());
    EXPECT_EQ(energy_saving_pct(6350.0, 6635.0), 100.0 * 285.0 / 6635.0);
}

TEST(Run, Deterministic) {
    const auto prepared = prepare(small_follow("[ACC, CCC, PCC]"));
    const auto a = run(prepared);
    const auto b = run(prepared);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        EXPECT_EQ(a.records[k].v, b.records[k].v);
        EXPECT_EQ(a.records[k].w, b.records[k].w);
    }
}

TEST(Run, CommandIsSaturatedMinimumOfCandidates) {
    const auto prepared = prepare(small_follow("[ACC, CCC, PCC]"));
    const auto log = run(prepared);
    for (const auto& r : log.records) {
        double lowest = 1e9;
        for (const auto& c : {r.u_acc, r.u_ccc, r.u_pcc}) {
            if (c) {
                lowest = std::min(lowest, *c);
            }
        }
        ASSERT_LT(lowest, 1e9);
        EXPECT_EQ(r.u, saturate(prepared.config.truck, r.v, lowest));
        for (const auto& c : {r.u_acc, r.u_ccc, r.u_pcc}) {
            if (c) {
                EXPECT_LE(r.u, saturate(prepared.config.truck, r.v, *c));
            }
        }
    }
}

TEST(Run, MetricsMatchRecomputation) {
    const auto prepared = prepare(small_follow("[CCC, PCC]"));
    const auto log = run(prepared);
    std::vector<TrajectorySample> traj;
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const auto& r = log.records[k];
        const double v_dot = k + 1 < log.records.size() ? (log.records[k + 1].v - r.v) / log.dt
                                                        : (r.v - log.records[k - 1].v) / log.dt;
        EXPECT_EQ(r.u_dr, u_dr_from_accel(prepared.config.truck, r.phi, r.v, v_dot));
        traj.push_back({r.t, r.v, r.u_dr});
    }
    const auto w = energy(traj);
    EXPECT_EQ(w.back(), log.summary.final_energy);
    EXPECT_EQ(log.records.back().w, log.summary.final_energy);
    EXPECT_EQ(log.summary.finish_time, log.records.back().t);
}

TEST(Run, MoreControllersNeverCommandMore) {
    const auto full = run(small_follow("[ACC, CCC, PCC]"));
    const auto two = run(small_follow("[CCC, PCC]"));
    const auto& a = full.records.front();
    const auto& b = two.records.front();
    EXPECT_LE(a.u, b.u);
    EXPECT_GT(full.summary.min_headway, 0.0);
    EXPECT_GT(two.summary.min_headway, 0.0);
}

TEST(Run, StopsAtRoadEnd) {
    const auto log = run(small_follow("[CCC]"));
    EXPECT_GE(log.records.back().s, 800.0);
    EXPECT_LT(log.records[log.records.size() - 2].s, 800.0);
}

TEST(Run, CruiseFallbackWithoutTargets) {
    auto cfg = small_follow("[CCC]");
    cfg.leaders.clear();
    const auto log = run(cfg);
    EXPECT_EQ(log.records.front().active, ControllerId::cruise);
    EXPECT_TRUE(std::isinf(log.summary.min_headway));
    EXPECT_FALSE(log.summary.collision);
}

TEST(Run, PccOnlyTracksProfile) {
    const auto log = run(load_scenario(scenario_path("pcc_only.yaml")));
    double worst = 0.0;
    for (const auto& r : log.records) {
        if (r.t > 10.0) {
            worst = std::max(worst, std::abs(r.v - *r.v_pcc));
        }
    }
    EXPECT_LT(worst, 1.0);
    EXPECT_EQ(log.summary.switch_count, 0);
}

TEST(Run, CollisionIsReported) {
    const auto log = run(load_scenario(scenario_path("collide.yaml")));
    EXPECT_TRUE(log.summary.collision);
    EXPECT_LE(log.summary.min_headway, 0.0);
}

TEST(Run, UnsolvableProfileIsConfigError) {
    auto cfg = small_follow("[PCC]");
    cfg.pcc.t_max = 10.0;
    EXPECT_THROW((void)prepare(cfg), ConfigError);
}

TEST(RunLog, CsvRoundTrip) {
    const auto log = run(small_follow("[ACC, CCC, PCC]"));
    std::stringstream csv;
    write_run_csv(csv, log);
    const auto back = read_run_csv(csv);
    ASSERT_EQ(back.records.size(), log.records.size());
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const auto& a = log.records[k];
        const auto& b = back.records[k];
        EXPECT_EQ(a.t, b.t);
        EXPECT_EQ(a.v, b.v);
        EXPECT_EQ(a.h_r, b.h_r);
        EXPECT_EQ(a.h_c, b.h_c);
        EXPECT_EQ(a.u_pcc, b.u_pcc);
        EXPECT_EQ(a.u, b.u);
        EXPECT_EQ(a.active, b.active);
        EXPECT_EQ(a.u_dr, b.u_dr);
        EXPECT_EQ(a.w, b.w);
    }
    EXPECT_EQ(back.summary.final_energy, log.summary.final_energy);
    EXPECT_EQ(back.summary.switch_count, log.summary.switch_count);
    EXPECT_NEAR(back.dt, log.dt, 1e-12);
}

TEST(RunLog, BadCsvIsParseError) {
    std::istringstream bad_header("t,s\n0,0\n");
    EXPECT_THROW((void)read_run_csv(bad_header), ParseError);
    std::istringstream bad_row("t,s,v,h_r,v1_r,h_c,v1_c,u_acc,u_ccc,u_pcc,u,active,u_dr,w\n0,0,x,,,,,,,,0,CCC,0,0\n");
    EXPECT_THROW((void)read_run_csv(bad_row), ParseError);
}

TEST(RunLog, SummaryJson) {
    RunSummary s;
    s.final_energy = 12.5;
    s.finish_time = 30.0;
    s.switch_count = 3;
    std::stringstream out;
    write_summary_json(out, s);
    const auto j = nlohmann::json::parse(out.str());
    EXPECT_EQ(j["final_energy_J_per_kg"], 12.5);
    EXPECT_TRUE(j["min_headway_m"].is_null());
    EXPECT_EQ(j["finish_time_s"], 30.0);
    EXPECT_EQ(j["switch_count"], 3);
    EXPECT_EQ(j["collision"], false);
    EXPECT_FALSE(j.contains("saving_vs_baseline_pct"));
    s.saving_pct = 4.3;
    std::stringstream with;
    write_summary_json(with, s);
    EXPECT_EQ(nlohmann::json::parse(with.str())["saving_vs_baseline_pct"], 4.3);
}

TEST(Scenarios, StopAndGoFilterSavesEnergyOverHeadwayOnly) {
    auto cfg = load_scenario(scenario_path("stop_and_go.yaml"));
    const auto filtered = run(cfg);
    cfg.controllers = {false, true, false};
    const auto ccc_only = run(cfg);
    EXPECT_FALSE(filtered.summary.collision);
    EXPECT_FALSE(ccc_only.summary.collision);
    EXPECT_LT(filtered.summary.final_energy, ccc_only.summary.final_energy);
}

} // namespace
} // namespace ecosafe
