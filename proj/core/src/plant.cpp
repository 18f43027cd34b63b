#include "ecosafe/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecosafe/error.hpp"

namespace ecosafe {

void TruckParams::validate() const {
    const double fields[] = {tire_radius, mass,      effective_mass, rolling_resistance, air_drag, gravity,
                             max_decel,   max_accel, max_power,      max_drive,          max_brake};
    for (double f : fields) {
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw ConfigError("truck parameters must be finite and strictly positive");
        }
    }
    if (effective_mass < mass) {
        throw ConfigError("effective mass must not be below the vehicle mass");
    }
}

double road_resistance(const TruckParams& p, double phi) noexcept {
    return p.mass * p.gravity / p.effective_mass * (std::sin(phi) + p.rolling_resistance * std::cos(phi));
}

double air_drag(const TruckParams& p, double v) noexcept {
    return p.air_drag / p.effective_mass * v * v;
}

InputBounds input_bounds(const TruckParams& p, double v) noexcept {
    double upper = p.max_accel;
    if (v > 0.0) {
        upper = std::min(upper, p.max_power / (p.effective_mass * v));
    }
    return {-p.max_decel, upper};
}

double saturate(const TruckParams& p, double v, double u) noexcept {
    const auto [lo, hi] = input_bounds(p, v);
    return std::clamp(u, lo, hi);
}

double drive_limit(const TruckParams& p, double v) noexcept {
    if (v > 0.0) {
        return std::min(p.max_drive, p.max_power / (p.effective_mass * v));
    }
    return p.max_drive;
}

ScaledTorque low_level_invert(const TruckParams& p, double phi, double v, double u) noexcept {
    const double u_hat = u + road_resistance(p, phi) + air_drag(p, v);
    if (u_hat >= 0.0) {
        return {std::min(u_hat, drive_limit(p, v)), 0.0};
    }
    return {0.0, std::max(u_hat, -p.max_brake)};
}

double physical_accel(const TruckParams& p, double phi, double v, double u_hat) noexcept {
    return u_hat - road_resistance(p, phi) - p.air_drag / p.effective_mass * v * std::abs(v);
}

VehicleState step(const TruckParams& p, const VehicleState& state, double input, const SlopeLookup& slope,
                  double dt, PlantMode mode) {
    auto accel = [&](double s, double v) {
        if (mode == PlantMode::ideal) {
            return input;
        }
        return physical_accel(p, slope(s), v, input);
    };

    if (state.v <= 0.0 && accel(state.s, 0.0) <= 0.0) {
        return {state.s, 0.0};
    }

    const double k1s = state.v;
    const double k1v = accel(state.s, state.v);
    const double k2s = state.v + 0.5 * dt * k1v;
    const double k2v = accel(state.s + 0.5 * dt * k1s, k2s);
    const double k3s = state.v + 0.5 * dt * k2v;
    const double k3v = accel(state.s + 0.5 * dt * k2s, k3s);
    const double k4s = state.v + dt * k3v;
    const double k4v = accel(state.s + dt * k3s, k4s);

    VehicleState next{state.s + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
                      state.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
    if (next.v < 0.0) {
        // Stopped inside the step: advance to the stopping point under the
        // step's mean deceleration.
        const double mean_decel = (state.v - next.v) / dt;
        next.s = state.s + (mean_decel > 0.0 ? state.v * state.v / (2.0 * mean_decel) : 0.0);
        next.v = 0.0;
    }
    return next;
}

} // namespace ecosafe
