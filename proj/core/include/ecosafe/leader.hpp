#pragma once

#include <cstdint>
#include <vector>

namespace ecosafe {

struct SpeedSample {
    double t = 0.0; // [s]
    double v = 0.0; // [m/s]
};

// A preceding vehicle replaying a recorded speed profile. Before the first
// sample and after the last one the nearest sample's speed is held.
struct LeaderSpec {
    double initial_gap = 50.0; // bumper-to-bumper distance ahead of the ego at t = 0 [m]
    std::vector<SpeedSample> profile;
    bool connected = false;

    void validate() const;
};

// Exact kinematics of a piecewise-linear speed profile.
class LeaderTrack {
public:
    LeaderTrack(const LeaderSpec& spec, double ego_start);

    [[nodiscard]] double position(double t) const noexcept;
    [[nodiscard]] double speed(double t) const noexcept;
    // Profile slope; zero outside the recorded span.
    [[nodiscard]] double accel(double t) const noexcept;
    [[nodiscard]] bool connected() const noexcept { return connected_; }

private:
    [[nodiscard]] std::size_t segment(double t) const noexcept;

    std::vector<SpeedSample> profile_;
    std::vector<double> travelled_; // distance covered at each sample time
    double start_ = 0.0;
    bool connected_ = false;
};

// Deterministic multiplicative perturbation of the speed samples,
// v_k <- v_k * (1 + e_k) with e_k uniform in [-amplitude, amplitude].
[[nodiscard]] LeaderSpec perturb(const LeaderSpec& spec, std::uint64_t seed, double amplitude);

} // namespace ecosafe
