#include "ecosafe/cbf.hpp"

#include <algorithm>
#include <cmath>

#include "ecosafe/error.hpp"

namespace ecosafe {

void CriticalDistance::validate() const {
    if (!(time_headway > 0.0) || !(standstill_gap >= 0.0)) {
        throw ConfigError("critical distance needs time_headway > 0 and standstill_gap >= 0");
    }
}

BarrierState barrier_eval(const CriticalDistance& rho, const FollowState& x) noexcept {
    BarrierState bs;
    bs.x = x;
    bs.value = x.h - rho(x.v, x.v1);
    // grad b = (1, -tau, 0); f = (v1 - v, 0, a1); g = (0, 1, 0)
    bs.drift = x.v1 - x.v;
    bs.input_gain = -rho.time_headway;
    return bs;
}

bool cbf_condition_holds(const BarrierState& bs, double u, double decay_rate) noexcept {
    return bs.drift + bs.input_gain * u >= -decay_rate * bs.value;
}

double safe_input(const BarrierState& bs, double decay_rate) {
    if (bs.input_gain == 0.0) {
        throw DegenerateBarrierError("barrier has zero input gain; the input cannot affect safety");
    }
    return -(bs.drift + decay_rate * bs.value) / bs.input_gain;
}

double qp_filter(const BarrierState& bs, double u_nom, double decay_rate) {
    const double u_safe = safe_input(bs, decay_rate);
    return bs.input_gain < 0.0 ? std::min(u_nom, u_safe) : std::max(u_nom, u_safe);
}

bool assumption1_check(const std::function<double(double, double)>& rho, std::span<const double> v_grid,
                       std::span<const double> v1_grid) {
    if (v_grid.empty() || v1_grid.empty()) {
        return false;
    }
    for (double v : v_grid) {
        const double dv = 1e-4 * std::max(1.0, std::abs(v));
        for (double v1 : v1_grid) {
            const double slope = (rho(v + dv, v1) - rho(v - dv, v1)) / (2.0 * dv);
            if (!(slope > 0.0)) {
                return false;
            }
        }
    }
    return true;
}

bool assumption1_check(const CriticalDistance& rho, std::span<const double> v_grid, std::span<const double> v1_grid) {
    return assumption1_check([rho](double v, double v1) { return rho(v, v1); }, v_grid, v1_grid);
}

FollowState car_following_step(const FollowState& x, double t, double dt, const FollowControl& control,
                               const LeaderSpeed& leader_speed) {
    struct Rate {
        double h;
        double v;
    };
    auto rate = [&](double h, double v, double tt) {
        const FollowState at{h, v, leader_speed(tt)};
        return Rate{at.v1 - v, control(at)};
    };
    const Rate k1 = rate(x.h, x.v, t);
    const Rate k2 = rate(x.h + 0.5 * dt * k1.h, x.v + 0.5 * dt * k1.v, t + 0.5 * dt);
    const Rate k3 = rate(x.h + 0.5 * dt * k2.h, x.v + 0.5 * dt * k2.v, t + 0.5 * dt);
    const Rate k4 = rate(x.h + dt * k3.h, x.v + dt * k3.v, t + dt);
    return {x.h + dt / 6.0 * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h),
            x.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v), leader_speed(t + dt)};
}

} // namespace ecosafe
