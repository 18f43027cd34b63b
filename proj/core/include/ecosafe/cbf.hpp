#pragma once

#include <functional>
#include <span>

#include "ecosafe/controllers.hpp"

namespace ecosafe {

// Minimum admissible headway rho(v, v1) = standstill_gap + time_headway * v.
// Must increase strictly with ego speed, hence time_headway > 0.
struct CriticalDistance {
    double standstill_gap = 5.0; // rho_0 [m]
    double time_headway = 1.5;   // tau [s]

    [[nodiscard]] double operator()(double v, double /*v1*/) const noexcept { return standstill_gap + time_headway * v; }

    void validate() const;
};

// Barrier b = h - rho(v, v1) and its Lie derivatives along the
// car-following model h' = v1 - v, v' = u, v1' = a1.
struct BarrierState {
    FollowState x;
    double value = 0.0;      // b [m]
    double drift = 0.0;      // L_f b [m/s]
    double input_gain = 0.0; // L_g b [s]
};

[[nodiscard]] BarrierState barrier_eval(const CriticalDistance& rho, const FollowState& x) noexcept;

// L_f b + L_g b u >= -decay_rate * b, with the linear class-K function.
[[nodiscard]] bool cbf_condition_holds(const BarrierState& bs, double u, double decay_rate) noexcept;

// -(L_f b + decay_rate * b) / L_g b. Throws DegenerateBarrierError when L_g b = 0.
[[nodiscard]] double safe_input(const BarrierState& bs, double decay_rate);

// Closed-form minimizer of (u - u_nom)^2 / 2 subject to the CBF condition.
[[nodiscard]] double qp_filter(const BarrierState& bs, double u_nom, double decay_rate);

// True iff the finite-difference slope of rho in v is strictly positive at
// every (v, v1) grid point.
[[nodiscard]] bool assumption1_check(const std::function<double(double, double)>& rho,
                                     std::span<const double> v_grid, std::span<const double> v1_grid);
[[nodiscard]] bool assumption1_check(const CriticalDistance& rho, std::span<const double> v_grid,
                                     std::span<const double> v1_grid);

using FollowControl = std::function<double(const FollowState&)>;
using LeaderSpeed = std::function<double(double)>;

// RK4 step of the car-following model under state feedback, with the
// leader speed given as a function of time. The control law is evaluated
// at every stage, so barrier dynamics are integrated exactly as an ODE.
[[nodiscard]] FollowState car_following_step(const FollowState& x, double t, double dt, const FollowControl& control,
                                             const LeaderSpeed& leader_speed);

} // namespace ecosafe
