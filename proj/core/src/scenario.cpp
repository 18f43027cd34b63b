#include "ecosafe/scenario.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ecosafe/error.hpp"

namespace ecosafe {

namespace {

void reject_unknown(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) {
        throw ConfigError(where + ": expected a mapping");
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!keys.contains(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
    if (const auto v = node[key]) {
        out = v.as<T>();
    }
}

void read_truck(const YAML::Node& n, TruckParams& t) {
    reject_unknown(n, "truck",
                   {"tire_radius", "mass", "effective_mass", "rolling_resistance", "air_drag", "gravity", "max_decel",
                    "max_accel", "max_power", "max_drive", "max_brake"});
    read(n, "tire_radius", t.tire_radius);
    read(n, "mass", t.mass);
    read(n, "effective_mass", t.effective_mass);
    read(n, "rolling_resistance", t.rolling_resistance);
    read(n, "air_drag", t.air_drag);
    read(n, "gravity", t.gravity);
    read(n, "max_decel", t.max_decel);
    read(n, "max_accel", t.max_accel);
    read(n, "max_power", t.max_power);
    read(n, "max_drive", t.max_drive);
    read(n, "max_brake", t.max_brake);
}

void read_ccc_overrides(const YAML::Node& n, CccParams& p) {
    read(n, "stop_distance", p.stop_distance);
    read(n, "range_gradient", p.range_gradient);
    read(n, "cruise_margin", p.cruise_margin);
    read(n, "gain_range", p.gain_range);
    read(n, "gain_relative", p.gain_relative);
    read(n, "gain_cruise", p.gain_cruise);
    read(n, "speed_limit", p.speed_limit);
}

constexpr std::initializer_list<const char*> kCccKeys = {"stop_distance", "gain_range",  "range_gradient",
                                                         "gain_relative", "gain_cruise", "cruise_margin",
                                                         "speed_limit"};

void read_controllers(const YAML::Node& n, ScenarioConfig& cfg) {
    reject_unknown(n, "controllers",
                   {"preset", "pcc_gain", "acc", "ccc", "stop_distance", "range_gradient", "cruise_margin",
                    "gain_range", "gain_relative", "gain_cruise", "speed_limit"});
    CccParams shared;
    if (const auto preset = n["preset"]) {
        shared = CccParams::preset(preset.as<std::string>());
    }
    read_ccc_overrides(n, shared);
    cfg.acc = shared;
    cfg.ccc = shared;
    cfg.pcc_gain = shared.gain_cruise;
    if (const auto acc = n["acc"]) {
        reject_unknown(acc, "controllers.acc", kCccKeys);
        read_ccc_overrides(acc, cfg.acc);
    }
    if (const auto ccc = n["ccc"]) {
        reject_unknown(ccc, "controllers.ccc", kCccKeys);
        read_ccc_overrides(ccc, cfg.ccc);
    }
    read(n, "pcc_gain", cfg.pcc_gain);
}

SpeedLimits read_limits(const YAML::Node& n) {
    if (n.IsMap()) {
        reject_unknown(n, "road.speed_limits", {"v_min", "v_max"});
        return SpeedLimits::uniform(n["v_min"].as<double>(), n["v_max"].as<double>());
    }
    std::vector<SpeedLimitSegment> segs;
    for (const auto& row : n) {
        if (!row.IsSequence() || row.size() != 3) {
            throw ConfigError("road.speed_limits rows must be [s_start, v_min, v_max]");
        }
        segs.push_back({row[0].as<double>(), row[1].as<double>(), row[2].as<double>()});
    }
    return SpeedLimits(std::move(segs));
}

void read_road(const YAML::Node& n, const std::filesystem::path& base, RoadSource& road) {
    reject_unknown(n, "road", {"file", "synthetic", "speed_limits", "smoothing_window", "grid_step"});
    if (const auto f = n["file"]) {
        std::filesystem::path p = f.as<std::string>();
        road.file = p.is_relative() ? base / p : p;
    }
    if (const auto syn = n["synthetic"]) {
        reject_unknown(syn, "road.synthetic", {"kind", "length", "step", "height"});
        SyntheticRoadSpec spec;
        if (const auto kind = syn["kind"]) {
            spec.kind = parse_synthetic_road(kind.as<std::string>());
        }
        read(syn, "length", spec.length);
        read(syn, "step", spec.step);
        read(syn, "height", spec.height);
        road.synthetic = spec;
    }
    if (const auto lim = n["speed_limits"]) {
        road.limits = read_limits(lim);
    }
    read(n, "smoothing_window", road.ingest.smoothing_window);
    read(n, "grid_step", road.ingest.grid_step);
}

void read_pcc(const YAML::Node& n, PccConfig& pcc) {
    if (n.IsScalar()) {
        const auto v = n.as<std::string>();
        if (v != "disabled") {
            throw ConfigError("pcc: expected a mapping or 'disabled'");
        }
        pcc.enabled = false;
        return;
    }
    reject_unknown(n, "pcc",
                   {"enabled", "v0", "vf", "t_max", "ds", "speed_step", "time_tolerance", "max_bisections", "max_span",
                    "max_coast", "max_labels"});
    pcc.enabled = true;
    read(n, "enabled", pcc.enabled);
    read(n, "v0", pcc.v0);
    read(n, "vf", pcc.vf);
    read(n, "t_max", pcc.t_max);
    read(n, "ds", pcc.settings.ds);
    read(n, "speed_step", pcc.settings.speed_step);
    read(n, "time_tolerance", pcc.settings.time_tolerance);
    read(n, "max_bisections", pcc.settings.max_bisections);
    read(n, "max_span", pcc.settings.max_span);
    read(n, "max_coast", pcc.settings.max_coast);
    read(n, "max_labels", pcc.settings.max_labels);
}

LeaderSpec read_leader(const YAML::Node& n, const std::filesystem::path& base) {
    reject_unknown(n, "leaders[]", {"gap", "connected", "profile", "profile_file"});
    LeaderSpec spec;
    spec.initial_gap = n["gap"] ? n["gap"].as<double>() : spec.initial_gap;
    read(n, "connected", spec.connected);
    if (const auto prof = n["profile"]) {
        for (const auto& row : prof) {
            if (!row.IsSequence() || row.size() != 2) {
                throw ConfigError("leader profile rows must be [t, v]");
            }
            spec.profile.push_back({row[0].as<double>(), row[1].as<double>()});
        }
    } else if (const auto file = n["profile_file"]) {
        std::filesystem::path p = file.as<std::string>();
        if (p.is_relative()) {
            p = base / p;
        }
        std::ifstream in(p);
        if (!in) {
            throw ConfigError("cannot open leader profile '" + p.string() + "'");
        }
        spec.profile = read_speed_profile_csv(in);
    } else {
        throw ConfigError("leader needs 'profile' or 'profile_file'");
    }
    return spec;
}

ControllerSet read_controller_set(const YAML::Node& n) {
    ControllerSet set{false, false, false};
    for (const auto& item : n) {
        const auto name = item.as<std::string>();
        if (name == "ACC") {
            set.acc = true;
        } else if (name == "CCC") {
            set.ccc = true;
        } else if (name == "PCC") {
            set.pcc = true;
        } else {
            throw ConfigError("controller_set: unknown controller '" + name + "'");
        }
    }
    return set;
}

} // namespace

void ScenarioConfig::validate() const {
    truck.validate();
    acc.validate();
    ccc.validate();
    cbf.rho.validate();
    if (!(cbf.decay_rate > 0.0)) {
        throw ConfigError("cbf.decay_rate must be positive");
    }
    if (!(pcc_gain > 0.0)) {
        throw ConfigError("pcc_gain must be positive");
    }
    if (!(dt > 0.0) || !(t_max > 0.0)) {
        throw ConfigError("dt and t_max must be positive");
    }
    if (!(sensing.radar_range > 0.0) || !(sensing.comms_range > 0.0) || !(sensing.comms_rate > 0.0) ||
        !(sensing.noise_std >= 0.0)) {
        throw ConfigError("sensing ranges and rate must be positive");
    }
    if (controllers.empty()) {
        throw ConfigError("controller_set must name at least one controller");
    }
    if (controllers.pcc && !pcc.enabled) {
        throw ConfigError("PCC is in the controller set but the pcc section is disabled");
    }
    if (!road.file && !road.synthetic) {
        throw ConfigError("road needs a file or a synthetic generator");
    }
    int connected = 0;
    for (const auto& l : leaders) {
        l.validate();
        connected += l.connected ? 1 : 0;
    }
    if (connected > 1) {
        throw ConfigError("at most one leader may be connected");
    }
    if (!(initial_speed() >= 0.0)) {
        throw ConfigError("ego initial speed must be non-negative");
    }
}

ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
    ScenarioConfig cfg;
    try {
        const YAML::Node root = YAML::Load(in);
        reject_unknown(root, "scenario",
                       {"name", "dt", "t_max", "plant_mode", "controller_set", "ego", "road", "truck", "controllers",
                        "cbf", "pcc", "sensing", "leaders"});
        read(root, "name", cfg.name);
        read(root, "dt", cfg.dt);
        read(root, "t_max", cfg.t_max);
        if (const auto mode = root["plant_mode"]) {
            const auto m = mode.as<std::string>();
            if (m == "ideal") {
                cfg.plant_mode = PlantMode::ideal;
            } else if (m == "physical") {
                cfg.plant_mode = PlantMode::physical;
            } else {
                throw ConfigError("plant_mode must be 'ideal' or 'physical'");
            }
        }
        if (const auto set = root["controller_set"]) {
            cfg.controllers = read_controller_set(set);
        }
        if (const auto ego = root["ego"]) {
            reject_unknown(ego, "ego", {"v0"});
            cfg.ego_v0 = ego["v0"].as<double>();
        }
        if (const auto road = root["road"]) {
            read_road(road, base_dir, cfg.road);
        }
        if (const auto truck = root["truck"]) {
            read_truck(truck, cfg.truck);
        }
        if (const auto ctl = root["controllers"]) {
            read_controllers(ctl, cfg);
        } else {
            cfg.acc = cfg.ccc = CccParams::highway();
            cfg.pcc_gain = cfg.ccc.gain_cruise;
        }
        if (const auto cbf = root["cbf"]) {
            reject_unknown(cbf, "cbf", {"standstill_gap", "time_headway", "decay_rate"});
            read(cbf, "standstill_gap", cfg.cbf.rho.standstill_gap);
            read(cbf, "time_headway", cfg.cbf.rho.time_headway);
            read(cbf, "decay_rate", cfg.cbf.decay_rate);
        }
        if (const auto pcc = root["pcc"]) {
            read_pcc(pcc, cfg.pcc);
        }
        if (const auto sensing = root["sensing"]) {
            reject_unknown(sensing, "sensing", {"radar_range", "comms_range", "comms_rate", "noise_std", "noise_seed"});
            read(sensing, "radar_range", cfg.sensing.radar_range);
            read(sensing, "comms_range", cfg.sensing.comms_range);
            read(sensing, "comms_rate", cfg.sensing.comms_rate);
            read(sensing, "noise_std", cfg.sensing.noise_std);
            read(sensing, "noise_seed", cfg.sensing.noise_seed);
        }
        if (const auto leaders = root["leaders"]) {
            for (const auto& l : leaders) {
                cfg.leaders.push_back(read_leader(l, base_dir));
            }
        }
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scenario YAML: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open scenario '" + file.string() + "'");
    }
    return parse_scenario(in, file.parent_path());
}

RoadProfile build_road(const RoadSource& source) {
    if (source.file) {
        std::ifstream in(*source.file);
        if (!in) {
            throw ConfigError("cannot open road file '" + source.file->string() + "'");
        }
        return ingest_elevation_csv(in, source.limits, source.ingest);
    }
    if (!source.synthetic) {
        throw ConfigError("road source has neither a file nor a synthetic generator");
    }
    const auto& syn = *source.synthetic;
    return build_profile(synthetic_elevation(syn.kind, syn.length, syn.step, syn.height), source.limits,
                         source.ingest);
}

std::vector<SpeedSample> read_speed_profile_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw ParseError(1, "missing header row");
    }
    std::vector<SpeedSample> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(line_no, "expected 't,v'");
        }
        SpeedSample s;
        std::istringstream a(line.substr(0, comma));
        std::istringstream b(line.substr(comma + 1));
        if (!(a >> s.t) || !(b >> s.v)) {
            throw ParseError(line_no, "invalid number");
        }
        out.push_back(s);
    }
    return out;
}

} // namespace ecosafe
