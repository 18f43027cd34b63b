#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecosafe/cbf.hpp"
#include "ecosafe/controllers.hpp"
#include "ecosafe/leader.hpp"
#include "ecosafe/pcc.hpp"
#include "ecosafe/plant.hpp"
#include "ecosafe/road.hpp"

namespace ecosafe {

struct SyntheticRoadSpec {
    SyntheticRoad kind = SyntheticRoad::flat;
    double length = 3000.0;
    double step = 2.5;
    double height = 0.0;
};

struct RoadSource {
    std::optional<std::filesystem::path> file;  // elevation CSV
    std::optional<SyntheticRoadSpec> synthetic; // used when no file is given
    SpeedLimits limits;
    IngestOptions ingest;
};

struct PccConfig {
    bool enabled = false;
    double v0 = 20.0;
    double vf = 20.0;
    double t_max = 150.0;
    SolverSettings settings;
};

struct SensingConfig {
    double radar_range = 200.0; // [m]
    double comms_range = 300.0; // [m]
    double comms_rate = 10.0;   // [Hz]
    double noise_std = 0.0;     // additive Gaussian noise on h and v1, off by default
    std::uint64_t noise_seed = 1;
};

struct ControllerSet {
    bool acc = true;
    bool ccc = true;
    bool pcc = true;

    [[nodiscard]] bool empty() const noexcept { return !acc && !ccc && !pcc; }
};

struct CbfConfig {
    CriticalDistance rho;
    double decay_rate = 1.0; // slope of the linear class-K function [1/s]
};

struct ScenarioConfig {
    std::string name;
    RoadSource road;
    TruckParams truck;
    CccParams acc;  // radar-fed controller
    CccParams ccc;  // connectivity-fed controller
    double pcc_gain = 0.7; // alpha_CC of the profile-tracking controller [1/s]
    CbfConfig cbf;
    PccConfig pcc;
    std::vector<LeaderSpec> leaders;
    SensingConfig sensing;
    double dt = 0.01;         // control step [s]
    double t_max = 3600.0;    // simulated-time budget [s]
    std::optional<double> ego_v0; // defaults to pcc.v0
    PlantMode plant_mode = PlantMode::ideal;
    ControllerSet controllers;

    [[nodiscard]] double initial_speed() const noexcept { return ego_v0.value_or(pcc.v0); }

    void validate() const;
};

// Parses the YAML scenario schema documented in the README. Relative road
// and leader file paths resolve against `base_dir`.
[[nodiscard]] ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {});
[[nodiscard]] ScenarioConfig load_scenario(const std::filesystem::path& file);

[[nodiscard]] RoadProfile build_road(const RoadSource& source);

// Reads "t,v" leader profile CSVs (header row required).
[[nodiscard]] std::vector<SpeedSample> read_speed_profile_csv(std::istream& in);

} // namespace ecosafe
