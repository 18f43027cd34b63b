#include "ecosafe/leader.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>

#include "ecosafe/error.hpp"

namespace ecosafe {

void LeaderSpec::validate() const {
    if (profile.empty()) {
        throw ConfigError("leader speed profile is empty");
    }
    if (!(initial_gap > 0.0) || !std::isfinite(initial_gap)) {
        throw ConfigError("leader initial gap must be positive");
    }
    for (std::size_t k = 0; k < profile.size(); ++k) {
        if (!(profile[k].v >= 0.0) || !std::isfinite(profile[k].v) || !std::isfinite(profile[k].t)) {
            throw ConfigError("leader speeds must be finite and non-negative");
        }
        if (k > 0 && !(profile[k].t > profile[k - 1].t)) {
            throw ConfigError("leader profile times must be strictly increasing");
        }
    }
}

LeaderTrack::LeaderTrack(const LeaderSpec& spec, double ego_start)
    : profile_(spec.profile), start_(ego_start + spec.initial_gap), connected_(spec.connected) {
    spec.validate();
    travelled_.resize(profile_.size());
    travelled_[0] = profile_[0].v * profile_[0].t;
    for (std::size_t k = 1; k < profile_.size(); ++k) {
        const double dt = profile_[k].t - profile_[k - 1].t;
        travelled_[k] = travelled_[k - 1] + 0.5 * (profile_[k].v + profile_[k - 1].v) * dt;
    }
}

std::size_t LeaderTrack::segment(double t) const noexcept {
    auto it = std::upper_bound(profile_.begin(), profile_.end(), t,
                               [](double x, const SpeedSample& p) { return x < p.t; });
    return static_cast<std::size_t>(std::distance(profile_.begin(), it));
}

double LeaderTrack::position(double t) const noexcept {
    const std::size_t k = segment(t);
    if (k == 0) {
        return start_ + profile_[0].v * t;
    }
    const auto& a = profile_[k - 1];
    const double tau = t - a.t;
    if (k == profile_.size()) {
        return start_ + travelled_[k - 1] + a.v * tau;
    }
    const auto& b = profile_[k];
    const double slope = (b.v - a.v) / (b.t - a.t);
    return start_ + travelled_[k - 1] + a.v * tau + 0.5 * slope * tau * tau;
}

double LeaderTrack::speed(double t) const noexcept {
    const std::size_t k = segment(t);
    if (k == 0) {
        return profile_[0].v;
    }
    if (k == profile_.size()) {
        return profile_.back().v;
    }
    const auto& a = profile_[k - 1];
    const auto& b = profile_[k];
    return a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t);
}

double LeaderTrack::accel(double t) const noexcept {
    const std::size_t k = segment(t);
    if (k == 0 || k == profile_.size()) {
        return 0.0;
    }
    const auto& a = profile_[k - 1];
    const auto& b = profile_[k];
    return (b.v - a.v) / (b.t - a.t);
}

LeaderSpec perturb(const LeaderSpec& spec, std::uint64_t seed, double amplitude) {
    LeaderSpec out = spec;
    std::mt19937_64 gen(seed);
    for (auto& p : out.profile) {
        // 53 random bits mapped to [0, 1)
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        p.v = std::max(0.0, p.v * (1.0 + amplitude * (2.0 * unit - 1.0)));
    }
    return out;
}

} // namespace ecosafe
