#include "ecosafe/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ecosafe/error.hpp"

namespace ecosafe {

namespace {

// Box-Muller on raw engine output so noise sequences are reproducible
// across standard libraries.
class GaussianNoise {
public:
    GaussianNoise(std::uint64_t seed, double stddev) : gen_(seed), stddev_(stddev) {}

    double operator()() {
        if (stddev_ == 0.0) {
            return 0.0;
        }
        const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return stddev_ * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 gen_;
    double stddev_;
};

} // namespace

SensorFrame sense(double ego_position, std::span<const LeaderPose> leaders, const SensingConfig& cfg,
                  const std::optional<CommsMessage>& message) {
    SensorFrame frame;
    const LeaderPose* nearest = nullptr;
    for (const auto& l : leaders) {
        if (nearest == nullptr || l.position < nearest->position) {
            nearest = &l;
        }
    }
    if (nearest != nullptr) {
        const double gap = nearest->position - ego_position;
        if (gap <= cfg.radar_range) {
            frame.radar = Reading{gap, nearest->speed};
        }
    }
    if (message && message->in_range) {
        frame.comms = Reading{message->position - ego_position, message->speed};
    }
    return frame;
}

PreparedScenario prepare(const ScenarioConfig& config) {
    config.validate();
    RoadProfile road = build_road(config.road);
    std::optional<OptimalProfile> profile;
    if (config.pcc.enabled) {
        try {
            profile = solve(OcpSpec{road, config.truck, config.pcc.v0, config.pcc.vf, config.pcc.t_max,
                                    config.pcc.settings});
        } catch (const Error& e) {
            throw ConfigError(std::string("PCC profile could not be solved: ") + e.what());
        }
    }
    return {config, std::move(road), std::move(profile)};
}

RunLog run(const PreparedScenario& scenario) {
    const auto& cfg = scenario.config;
    const auto& road = scenario.road;
    const auto& truck = cfg.truck;
    if (cfg.controllers.pcc && !scenario.profile) {
        throw ConfigError("PCC enabled without a solved profile");
    }

    std::vector<LeaderTrack> tracks;
    tracks.reserve(cfg.leaders.size());
    for (const auto& spec : cfg.leaders) {
        tracks.emplace_back(spec, 0.0);
    }
    std::vector<LeaderPose> poses(tracks.size());

    const double s_f = road.length();
    const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
    const auto comms_period =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / (cfg.sensing.comms_rate * cfg.dt))));
    const SlopeLookup slope = [&road](double s) { return road.slope_at_clamped(s); };
    GaussianNoise noise(cfg.sensing.noise_seed, cfg.sensing.noise_std);

    RunLog log;
    log.dt = cfg.dt;
    log.records.reserve(std::min<std::size_t>(max_steps + 1, 1u << 20));

    VehicleState ego{0.0, cfg.initial_speed()};
    std::optional<CommsMessage> message;
    std::vector<Candidate> candidates;
    candidates.reserve(3);

    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        StepRecord rec;
        rec.t = t;
        rec.s = ego.s;
        rec.v = ego.v;
        rec.phi = road.slope_at_clamped(ego.s);

        for (std::size_t i = 0; i < tracks.size(); ++i) {
            poses[i] = {tracks[i].position(t), tracks[i].speed(t), tracks[i].connected()};
            rec.gap = std::min(rec.gap, poses[i].position - ego.s);
        }
        if (k % comms_period == 0) {
            message.reset();
            for (const auto& p : poses) {
                if (p.connected) {
                    message = CommsMessage{p.position, p.speed, p.position - ego.s <= cfg.sensing.comms_range};
                }
            }
        }

        SensorFrame frame = sense(ego.s, poses, cfg.sensing, message);
        for (auto* r : {&frame.radar, &frame.comms}) {
            if (*r) {
                (*r)->h += noise();
                (*r)->v1 = std::max(0.0, (*r)->v1 + noise());
            }
        }

        candidates.clear();
        if (cfg.controllers.acc && frame.radar) {
            rec.h_r = frame.radar->h;
            rec.v1_r = frame.radar->v1;
            rec.u_acc = ccc_accel(cfg.acc, {frame.radar->h, ego.v, frame.radar->v1});
            candidates.push_back({ControllerId::acc, *rec.u_acc});
        } else if (frame.radar) {
            rec.h_r = frame.radar->h;
            rec.v1_r = frame.radar->v1;
        }
        if (frame.comms) {
            rec.h_c = frame.comms->h;
            rec.v1_c = frame.comms->v1;
            if (cfg.controllers.ccc) {
                rec.u_ccc = ccc_accel(cfg.ccc, {frame.comms->h, ego.v, frame.comms->v1});
                candidates.push_back({ControllerId::ccc, *rec.u_ccc});
            }
        }
        if (cfg.controllers.pcc) {
            rec.v_pcc = scenario.profile->speed_at(ego.s);
            rec.u_pcc = pcc_feedback(cfg.pcc_gain, *rec.v_pcc, ego.v);
            candidates.push_back({ControllerId::pcc, *rec.u_pcc});
        }

        // Without any sensed target or profile the headway controllers act
        // as plain cruise control at their speed limit.
        LabeledFilterResult cmd{cruise_accel(cfg.controllers.ccc ? cfg.ccc : cfg.acc, ego.v), ControllerId::cruise};
        if (!candidates.empty()) {
            cmd = safety_filter(std::span<const Candidate>(candidates));
        }
        rec.u = saturate(truck, ego.v, cmd.accel);
        rec.active = cmd.active;
        log.records.push_back(rec);

        if (ego.s >= s_f || k >= max_steps) {
            break;
        }
        if (cfg.plant_mode == PlantMode::ideal) {
            ego = step(truck, ego, rec.u, slope, cfg.dt, PlantMode::ideal);
        } else {
            const double u_hat = low_level_invert(truck, rec.phi, ego.v, rec.u).total();
            ego = step(truck, ego, u_hat, slope, cfg.dt, PlantMode::physical);
        }
    }

    account_energy(truck, cfg.dt, log.records);
    log.summary = summarize(log);
    return log;
}

RunLog run(const ScenarioConfig& config) {
    return run(prepare(config));
}

void account_energy(const TruckParams& truck, double dt, std::vector<StepRecord>& records) {
    const std::size_t n = records.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (k + 1 < n) {
            records[k].v_dot = (records[k + 1].v - records[k].v) / dt;
        } else {
            records[k].v_dot = k > 0 ? records[k - 1].v_dot : 0.0;
        }
        records[k].u_dr = u_dr_from_accel(truck, records[k].phi, records[k].v, records[k].v_dot);
    }
    std::vector<TrajectorySample> traj(n);
    for (std::size_t k = 0; k < n; ++k) {
        traj[k] = {records[k].t, records[k].v, records[k].u_dr};
    }
    const auto w = energy(traj);
    for (std::size_t k = 0; k < n; ++k) {
        records[k].w = w[k];
    }
}

double energy_saving_pct(double energy, double baseline_energy) noexcept {
    return 100.0 * (baseline_energy - energy) / baseline_energy;
}

RunSummary summarize(const RunLog& log, const RunLog* baseline) {
    RunSummary out;
    if (log.records.empty()) {
        return out;
    }
    std::vector<TrajectorySample> traj;
    traj.reserve(log.records.size());
    for (const auto& r : log.records) {
        traj.push_back({r.t, r.v, r.u_dr});
        out.min_headway = std::min(out.min_headway, r.gap);
    }
    out.final_energy = energy(traj).back();
    out.finish_time = log.records.back().t;
    for (std::size_t k = 1; k < log.records.size(); ++k) {
        out.switch_count += log.records[k].active != log.records[k - 1].active ? 1 : 0;
    }
    out.collision = out.min_headway <= 0.0;
    if (baseline != nullptr) {
        const RunSummary base = summarize(*baseline);
        out.saving_pct = energy_saving_pct(out.final_energy, base.final_energy);
    }
    return out;
}

} // namespace ecosafe
