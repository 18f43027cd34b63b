#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace ecosafe {

struct ElevationSample {
    double s = 0.0;          // arc length [m]
    double elevation = 0.0;  // [m]
};

// One piece of a piecewise-constant speed-limit schedule. Applies from
// s_start up to the next segment's s_start.
struct SpeedLimitSegment {
    double s_start = 0.0;
    double v_min = 0.0;  // [m/s]
    double v_max = 0.0;  // [m/s]
};

class SpeedLimits {
public:
    SpeedLimits() : SpeedLimits(uniform(2.5, 32.0)) {}
    explicit SpeedLimits(std::vector<SpeedLimitSegment> segments);

    static SpeedLimits uniform(double v_min, double v_max);

    [[nodiscard]] const SpeedLimitSegment& at(double s) const noexcept;
    [[nodiscard]] double v_min_at(double s) const noexcept { return at(s).v_min; }
    [[nodiscard]] double v_max_at(double s) const noexcept { return at(s).v_max; }

    [[nodiscard]] double lowest() const noexcept;
    [[nodiscard]] double highest() const noexcept;

    [[nodiscard]] const std::vector<SpeedLimitSegment>& segments() const noexcept { return segments_; }

private:
    std::vector<SpeedLimitSegment> segments_;
};

inline constexpr int kDefaultSmoothingWindow = 5;
inline constexpr double kDefaultGridStep = 2.5;

// Central-difference slope of the moving-average-smoothed elevation,
// phi_i = asin(clamp(dE/ds, -1, 1)). One-sided differences at the ends.
// The averaging window shrinks symmetrically near the ends, so linear
// profiles are reproduced exactly for any window.
[[nodiscard]] std::vector<double> slope_from_elevation(std::span<const ElevationSample> samples,
                                                       int smoothing_window = kDefaultSmoothingWindow);

// Linear resampling onto s = 0, step, 2*step, ... with the last sample
// kept at the original end point.
[[nodiscard]] std::vector<ElevationSample> resample_uniform(std::span<const ElevationSample> samples,
                                                            double step);

// Immutable road description shared by the plant, the optimizer and the
// simulator.
class RoadProfile {
public:
    RoadProfile(std::vector<ElevationSample> samples, std::vector<double> slope, SpeedLimits limits);

    static RoadProfile from_elevation(std::vector<ElevationSample> samples,
                                      SpeedLimits limits = {},
                                      int smoothing_window = kDefaultSmoothingWindow);

    [[nodiscard]] double slope_at(double s) const;
    [[nodiscard]] double elevation_at(double s) const;

    // Same as slope_at but clamps s into [0, s_f] instead of throwing.
    [[nodiscard]] double slope_at_clamped(double s) const noexcept;

    [[nodiscard]] double length() const noexcept { return samples_.back().s; }
    [[nodiscard]] const std::vector<ElevationSample>& samples() const noexcept { return samples_; }
    [[nodiscard]] const std::vector<double>& slope() const noexcept { return slope_; }
    [[nodiscard]] const SpeedLimits& limits() const noexcept { return limits_; }

    [[nodiscard]] double v_min_at(double s) const noexcept { return limits_.v_min_at(s); }
    [[nodiscard]] double v_max_at(double s) const noexcept { return limits_.v_max_at(s); }

    [[nodiscard]] RoadProfile with_limits(SpeedLimits limits) const;

private:
    [[nodiscard]] std::size_t segment_index(double s) const noexcept;

    std::vector<ElevationSample> samples_;
    std::vector<double> slope_;
    SpeedLimits limits_;
};

struct IngestOptions {
    int smoothing_window = kDefaultSmoothingWindow;
    // Resample to this uniform grid before differentiation; <= 0 keeps
    // the native sampling.
    double grid_step = kDefaultGridStep;
};

// Resamples (when options.grid_step > 0) and differentiates raw samples.
// The smoothing window is reduced to the largest odd value the sample
// count allows.
[[nodiscard]] RoadProfile build_profile(std::vector<ElevationSample> samples, const SpeedLimits& limits = {},
                                        const IngestOptions& options = {});

// Reads a "s,E" CSV (header row required) and hands it to build_profile.
[[nodiscard]] RoadProfile ingest_elevation_csv(std::istream& in,
                                               const SpeedLimits& limits = {},
                                               const IngestOptions& options = {});
[[nodiscard]] RoadProfile ingest_elevation_csv(std::string_view text,
                                               const SpeedLimits& limits = {},
                                               const IngestOptions& options = {});

void write_elevation_csv(std::ostream& out, std::span<const ElevationSample> samples);

enum class SyntheticRoad { flat, hill, two_hill, hill_valley };

[[nodiscard]] SyntheticRoad parse_synthetic_road(std::string_view name);

// Smooth synthetic elevation profiles built from raised-cosine bumps.
// `height` is the peak elevation change of each feature.
[[nodiscard]] std::vector<ElevationSample> synthetic_elevation(SyntheticRoad kind, double length,
                                                               double step, double height);

} // namespace ecosafe
