#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace ecosafe {

// Parameters of the headway-based cruise controller used for both ACC
// (radar feedback) and CCC (connectivity feedback).
struct CccParams {
    double stop_distance = 5.0;  // h_st [m]
    double range_gradient = 0.8; // kappa [1/s]
    double cruise_margin = 20.0; // delta = h_CC - h_go [m]
    double gain_range = 0.2;     // alpha [1/s]
    double gain_relative = 0.5;  // beta [1/s]
    double gain_cruise = 0.7;    // alpha_CC [1/s]
    double speed_limit = 32.0;   // v_max [m/s]

    // Headway above which the range policy saturates at the speed limit.
    [[nodiscard]] double go_distance() const noexcept { return stop_distance + speed_limit / range_gradient; }
    // Headway above which the controller becomes a pure cruise controller.
    [[nodiscard]] double cruise_distance() const noexcept { return go_distance() + cruise_margin; }

    void validate() const;

    // On-track preset (test-track runs).
    static CccParams on_track();
    // Highway preset.
    static CccParams highway();
    static CccParams preset(std::string_view name);
};

struct FollowState {
    double h = 0.0;  // bumper-to-bumper headway [m]; <= 0 means contact
    double v = 0.0;  // ego speed [m/s]
    double v1 = 0.0; // preceding-vehicle speed [m/s]
};

[[nodiscard]] double range_policy(const CccParams& p, double h) noexcept;
[[nodiscard]] double speed_policy(const CccParams& p, double v1) noexcept;
[[nodiscard]] double gain_range(const CccParams& p, double h) noexcept;
[[nodiscard]] double gain_relative(const CccParams& p, double h) noexcept;

// A(h) (V(h) - v) + B(h) (W(v1) - v)
[[nodiscard]] double ccc_accel(const CccParams& p, const FollowState& x) noexcept;

// The h -> infinity limit of ccc_accel: track the speed limit.
[[nodiscard]] double cruise_accel(const CccParams& p, double v) noexcept;

// Variable-speed cruise control around the optimized profile.
[[nodiscard]] double pcc_feedback(double gain_cruise, double v_target, double v) noexcept;

enum class ControllerId { acc = 0, ccc = 1, pcc = 2, cruise = 3 };

[[nodiscard]] std::string_view to_string(ControllerId id) noexcept;

struct Candidate {
    ControllerId id = ControllerId::pcc;
    double accel = 0.0;
};

struct FilterResult {
    double accel = 0.0;
    std::size_t active_index = 0; // position of the minimizer in the input list
};

// Min-of-controllers safety filter. Ties go to the earliest entry.
[[nodiscard]] FilterResult safety_filter(std::span<const double> candidates);

struct LabeledFilterResult {
    double accel = 0.0;
    ControllerId active = ControllerId::pcc;
};

[[nodiscard]] LabeledFilterResult safety_filter(std::span<const Candidate> candidates);

} // namespace ecosafe
