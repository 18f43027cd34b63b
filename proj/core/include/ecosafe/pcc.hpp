#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ecosafe/plant.hpp"
#include "ecosafe/road.hpp"

namespace ecosafe {

struct SolverSettings {
    double ds = 2.5;               // spatial step [m]; the grid uses s_f / ceil(s_f / ds)
    double speed_step = 0.1;       // speed quantization [m/s]
    // A one-cell speed change may be spread over up to this many spatial
    // cells, which lets accelerations below speed_step * v / ds through.
    int max_span = 16;
    // Longest zero-torque arc [cells]. It ends with a brief brake onto the
    // speed grid, so long arcs waste less kinetic energy.
    int max_coast = 128;
    double time_tolerance = 0.5;   // stop bisecting once t_max - t_f < this [s]
    int max_bisections = 40;
    // Label budget of the exact search that closes the gap left by the
    // time-price bisection; 0 keeps the bisection result.
    std::size_t max_labels = 2'000'000;
};

// Energy-optimal speed planning problem over a road. The travel-time
// budget must be reachable at the road's highest speed limit.
struct OcpSpec {
    RoadProfile road;
    TruckParams truck;
    double v0 = 20.0;      // initial speed [m/s]
    double vf = 20.0;      // final speed [m/s]
    double t_max = 150.0;  // travel-time budget [s]
    SolverSettings settings;
};

// Solved profile on the spatial grid. Node i carries the input applied
// on [s_i, s_{i+1}); the final node repeats the last arc's input.
struct OptimalProfile {
    std::vector<double> s;
    std::vector<double> v;
    std::vector<double> u_dr;   // >= 0
    std::vector<double> u_br;   // <= 0, u_dr * u_br == 0
    std::vector<double> energy; // cumulative drive work per unit effective mass [J/kg]
    double travel_time = 0.0;   // [s]
    double multiplier = 0.0;    // time price lambda of the accepted solution [J/(kg s)]
    double v0_mismatch = 0.0;   // grid start speed minus requested v0
    double vf_mismatch = 0.0;

    [[nodiscard]] double objective() const noexcept { return energy.empty() ? 0.0 : energy.back(); }

    // Linear interpolation of the optimal speed, clamped to the grid ends.
    [[nodiscard]] double speed_at(double s) const noexcept;
};

[[nodiscard]] OptimalProfile solve(const OcpSpec& spec);

struct TrajectorySample {
    double t = 0.0;
    double v = 0.0;
    double u_dr = 0.0;
};

// Cumulative trapezoidal integral of u_dr * v over time. Repeated time
// stamps are allowed and contribute nothing, which lets a trajectory
// carry step changes of u_dr.
[[nodiscard]] std::vector<double> energy(std::span<const TrajectorySample> trajectory);

// Drive input implied by a measured acceleration: max(0, v' + resistances).
[[nodiscard]] double u_dr_from_accel(const TruckParams& p, double phi, double v, double v_dot) noexcept;

// Trapezoidal integral of 1/v over the grid.
[[nodiscard]] double travel_time(const OptimalProfile& profile);
[[nodiscard]] double travel_time(std::span<const double> s, std::span<const double> v);

// Time-domain view of a profile: each arc becomes a constant-acceleration
// segment with its own u_dr, so energy() reproduces objective() exactly.
[[nodiscard]] std::vector<TrajectorySample> profile_trajectory(const OptimalProfile& profile);

void write_profile_csv(std::ostream& out, const OptimalProfile& profile);

} // namespace ecosafe
