#pragma once

#include <functional>

namespace ecosafe {

// Longitudinal truck parameters. Defaults describe a tractor without trailer.
struct TruckParams {
    double tire_radius = 0.5;       // R [m]
    double mass = 9000.0;           // m [kg]
    double effective_mass = 9157.0; // m_eff = m + I/R^2 [kg]
    double rolling_resistance = 0.006;
    double air_drag = 3.84;         // k_air [kg/m]
    double gravity = 9.81;          // [m/s^2]
    double max_decel = 4.0;         // magnitude of the lowest desired acceleration [m/s^2]
    double max_accel = 2.0;         // [m/s^2]
    double max_power = 93000.0;     // [W]
    double max_drive = 2.0;         // scaled drive torque cap [m/s^2]
    double max_brake = 4.0;         // scaled brake torque magnitude cap [m/s^2]

    void validate() const;
};

struct VehicleState {
    double s = 0.0;  // front-bumper position [m]
    double v = 0.0;  // [m/s]
};

struct InputBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Net wheel torque divided by R * m_eff, split into its drive (>= 0) and
// brake (<= 0) parts. At most one part is non-zero.
struct ScaledTorque {
    double drive = 0.0;
    double brake = 0.0;

    [[nodiscard]] double total() const noexcept { return drive + brake; }
};

enum class PlantMode {
    ideal,    // low-level loop compensates resistance exactly: v' = u
    physical, // v' = u_hat - road_resistance - air_drag
};

// Gravity plus rolling resistance, as an acceleration.
[[nodiscard]] double road_resistance(const TruckParams& p, double phi) noexcept;

// Aerodynamic drag as an acceleration.
[[nodiscard]] double air_drag(const TruckParams& p, double v) noexcept;

// Desired-acceleration envelope [-max_decel, min(max_accel, P/(m_eff v))].
// The power term is unbounded at v = 0.
[[nodiscard]] InputBounds input_bounds(const TruckParams& p, double v) noexcept;

[[nodiscard]] double saturate(const TruckParams& p, double v, double u) noexcept;

// Upper bound on the scaled drive torque at speed v.
[[nodiscard]] double drive_limit(const TruckParams& p, double v) noexcept;

// Exact inverse of the torque-level model: the scaled torque that realizes
// acceleration u, clipped to the drive and brake torque limits.
[[nodiscard]] ScaledTorque low_level_invert(const TruckParams& p, double phi, double v, double u) noexcept;

[[nodiscard]] double physical_accel(const TruckParams& p, double phi, double v, double u_hat) noexcept;

using SlopeLookup = std::function<double(double)>;

// One fixed RK4 step. In ideal mode `input` is the desired acceleration;
// in physical mode it is the scaled torque. Speed never goes below zero
// and a vehicle at rest stays there until the net force is positive.
[[nodiscard]] VehicleState step(const TruckParams& p, const VehicleState& state, double input,
                                const SlopeLookup& slope, double dt, PlantMode mode);

} // namespace ecosafe
