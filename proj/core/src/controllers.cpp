#include "ecosafe/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecosafe/error.hpp"

namespace ecosafe {

void CccParams::validate() const {
    const bool ok = stop_distance > 0.0 && range_gradient > 0.0 && cruise_margin > 0.0 && gain_range > 0.0 &&
                    gain_relative >= 0.0 && gain_cruise > 0.0 && speed_limit > 0.0;
    if (!ok) {
        throw ConfigError("controller parameters out of range");
    }
    const double h_go = go_distance();
    const double h_cc = cruise_distance();
    if (!std::isfinite(h_cc) || !(stop_distance < h_go && h_go < h_cc)) {
        throw ConfigError("controller breakpoints must satisfy h_st < h_go < h_CC");
    }
}

CccParams CccParams::on_track() {
    CccParams p;
    p.stop_distance = 5.0;
    p.range_gradient = 0.6;
    p.cruise_margin = 20.0;
    p.gain_range = 0.4;
    p.gain_relative = 0.5;
    p.gain_cruise = 0.9;
    p.speed_limit = 20.0;
    return p;
}

CccParams CccParams::highway() {
    CccParams p;
    p.stop_distance = 5.0;
    p.range_gradient = 0.8;
    p.cruise_margin = 20.0;
    p.gain_range = 0.2;
    p.gain_relative = 0.5;
    p.gain_cruise = 0.7;
    p.speed_limit = 32.0;
    return p;
}

CccParams CccParams::preset(std::string_view name) {
    if (name == "on-track" || name == "on_track") {
        return on_track();
    }
    if (name == "highway") {
        return highway();
    }
    throw ConfigError("unknown controller preset '" + std::string(name) + "'");
}

double range_policy(const CccParams& p, double h) noexcept {
    if (h <= p.stop_distance) {
        return 0.0;
    }
    if (h < p.go_distance()) {
        return p.range_gradient * (h - p.stop_distance);
    }
    return p.speed_limit;
}

double speed_policy(const CccParams& p, double v1) noexcept {
    return std::min(v1, p.speed_limit);
}

double gain_range(const CccParams& p, double h) noexcept {
    return h <= p.cruise_distance() ? p.gain_range : p.gain_cruise;
}

double gain_relative(const CccParams& p, double h) noexcept {
    const double h_go = p.go_distance();
    const double h_cc = p.cruise_distance();
    if (h <= h_go) {
        return p.gain_relative;
    }
    if (h < h_cc) {
        return p.gain_relative * (h_cc - h) / (h_cc - h_go);
    }
    return 0.0;
}

double ccc_accel(const CccParams& p, const FollowState& x) noexcept {
    return gain_range(p, x.h) * (range_policy(p, x.h) - x.v) +
           gain_relative(p, x.h) * (speed_policy(p, x.v1) - x.v);
}

double cruise_accel(const CccParams& p, double v) noexcept {
    return p.gain_cruise * (p.speed_limit - v);
}

double pcc_feedback(double gain_cruise, double v_target, double v) noexcept {
    return gain_cruise * (v_target - v);
}

std::string_view to_string(ControllerId id) noexcept {
    switch (id) {
    case ControllerId::acc:
        return "ACC";
    case ControllerId::ccc:
        return "CCC";
    case ControllerId::pcc:
        return "PCC";
    case ControllerId::cruise:
        return "CRUISE";
    }
    return "?";
}

FilterResult safety_filter(std::span<const double> candidates) {
    if (candidates.empty()) {
        throw ConfigError("safety filter needs at least one candidate");
    }
    FilterResult out{candidates[0], 0};
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i] < out.accel) {
            out = {candidates[i], i};
        }
    }
    return out;
}

LabeledFilterResult safety_filter(std::span<const Candidate> candidates) {
    if (candidates.empty()) {
        throw ConfigError("safety filter needs at least one candidate");
    }
    LabeledFilterResult out{candidates[0].accel, candidates[0].id};
    for (const auto& c : candidates.subspan(1)) {
        if (c.accel < out.accel) {
            out = {c.accel, c.id};
        }
    }
    return out;
}

} // namespace ecosafe
