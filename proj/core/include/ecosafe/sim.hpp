#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ecosafe/controllers.hpp"
#include "ecosafe/leader.hpp"
#include "ecosafe/pcc.hpp"
#include "ecosafe/road.hpp"
#include "ecosafe/scenario.hpp"

namespace ecosafe {

struct Reading {
    double h = 0.0;
    double v1 = 0.0;
};

struct SensorFrame {
    std::optional<Reading> radar;
    std::optional<Reading> comms;
};

// Latest connectivity message, held between broadcasts.
struct CommsMessage {
    double position = 0.0; // leader rear bumper [m]
    double speed = 0.0;
    bool in_range = false;
};

struct LeaderPose {
    double position = 0.0; // rear bumper [m]
    double speed = 0.0;
    bool connected = false;
};

// Radar sees the nearest leader within range. The comms channel reports the
// connected leader from the held message, with headway taken against the
// ego's current position.
[[nodiscard]] SensorFrame sense(double ego_position, std::span<const LeaderPose> leaders, const SensingConfig& cfg,
                                const std::optional<CommsMessage>& message);

// A scenario with its road built and (if enabled) its profile solved.
struct PreparedScenario {
    ScenarioConfig config;
    RoadProfile road;
    std::optional<OptimalProfile> profile;
};

[[nodiscard]] PreparedScenario prepare(const ScenarioConfig& config);

struct StepRecord {
    double t = 0.0;
    double s = 0.0;
    double v = 0.0;
    std::optional<double> h_r;
    std::optional<double> v1_r;
    std::optional<double> h_c;
    std::optional<double> v1_c;
    std::optional<double> u_acc;
    std::optional<double> u_ccc;
    std::optional<double> u_pcc;
    double u = 0.0;   // filtered and saturated command
    ControllerId active = ControllerId::pcc;
    double u_dr = 0.0;
    double w = 0.0;
    // Not part of the CSV log.
    double gap = std::numeric_limits<double>::infinity(); // true distance to the nearest leader
    double phi = 0.0;
    double v_dot = 0.0;
    std::optional<double> v_pcc;
};

struct RunSummary {
    double final_energy = 0.0; // [J/kg]
    double min_headway = std::numeric_limits<double>::infinity();
    double finish_time = 0.0;
    int switch_count = 0;
    bool collision = false;
    std::optional<double> saving_pct;
};

struct RunLog {
    double dt = 0.01;
    std::vector<StepRecord> records;
    RunSummary summary;
};

[[nodiscard]] RunLog run(const PreparedScenario& scenario);
[[nodiscard]] RunLog run(const ScenarioConfig& config);

// Per-record drive input and cumulative energy from logged speed and
// slope, using a forward difference for the acceleration.
void account_energy(const TruckParams& truck, double dt, std::vector<StepRecord>& records);

[[nodiscard]] RunSummary summarize(const RunLog& log, const RunLog* baseline = nullptr);

[[nodiscard]] double energy_saving_pct(double energy, double baseline_energy) noexcept;

void write_run_csv(std::ostream& out, const RunLog& log);
// Reads a log written by write_run_csv. Headway falls back from radar to
// comms; slope and acceleration are not stored and read back as zero.
[[nodiscard]] RunLog read_run_csv(std::istream& in);
void write_summary_json(std::ostream& out, const RunSummary& summary);

} // namespace ecosafe
