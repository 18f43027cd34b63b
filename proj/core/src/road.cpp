#include "ecosafe/road.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "ecosafe/error.hpp"

namespace ecosafe {

namespace {

void check_samples(std::span<const ElevationSample> samples) {
    if (samples.size() < 2) {
        throw ProfileTooShortError("elevation profile needs at least 2 samples, got " +
                                   std::to_string(samples.size()));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].s) || !std::isfinite(samples[i].elevation)) {
            throw MalformedProfileError("non-finite value in elevation sample " + std::to_string(i));
        }
        if (i > 0 && !(samples[i].s > samples[i - 1].s)) {
            throw MalformedProfileError("arc length must be strictly increasing (sample " +
                                        std::to_string(i) + ")");
        }
    }
}

std::vector<double> moving_average(std::span<const ElevationSample> samples, int window) {
    const auto n = static_cast<std::ptrdiff_t>(samples.size());
    const std::ptrdiff_t half = window / 2;
    std::vector<double> out(samples.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t k = std::min({half, i, n - 1 - i});
        double sum = 0.0;
        for (std::ptrdiff_t j = i - k; j <= i + k; ++j) {
            sum += samples[static_cast<std::size_t>(j)].elevation;
        }
        out[static_cast<std::size_t>(i)] = sum / static_cast<double>(2 * k + 1);
    }
    return out;
}

double interpolate(double x0, double y0, double x1, double y1, double x) {
    if (x == x0) {
        return y0;
    }
    if (x == x1) {
        return y1;
    }
    const double t = (x - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

double parse_number(std::string_view field, std::size_t line, const char* column) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ParseError(line, std::string("invalid ") + column + " value '" + std::string(field) + "'");
    }
    return value;
}

double raised_cosine(double s, double center, double width) {
    const double x = (s - center) / width;
    if (std::abs(x) >= 0.5) {
        return 0.0;
    }
    return 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * x));
}

} // namespace

SpeedLimits::SpeedLimits(std::vector<SpeedLimitSegment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) {
        throw ConfigError("speed limits need at least one segment");
    }
    if (segments_.front().s_start > 0.0) {
        throw ConfigError("first speed-limit segment must start at s <= 0");
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& seg = segments_[i];
        if (!(seg.v_min > 0.0) || !(seg.v_min <= seg.v_max) || !std::isfinite(seg.v_max)) {
            throw ConfigError("speed-limit segment " + std::to_string(i) + " violates 0 < v_min <= v_max");
        }
        if (i > 0 && !(seg.s_start > segments_[i - 1].s_start)) {
            throw ConfigError("speed-limit breakpoints must be strictly increasing");
        }
    }
}

SpeedLimits SpeedLimits::uniform(double v_min, double v_max) {
    return SpeedLimits(std::vector<SpeedLimitSegment>{{0.0, v_min, v_max}});
}

const SpeedLimitSegment& SpeedLimits::at(double s) const noexcept {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                               [](double x, const SpeedLimitSegment& seg) { return x < seg.s_start; });
    if (it == segments_.begin()) {
        return segments_.front();
    }
    return *std::prev(it);
}

double SpeedLimits::lowest() const noexcept {
    return std::min_element(segments_.begin(), segments_.end(),
                            [](const auto& a, const auto& b) { return a.v_min < b.v_min; })
        ->v_min;
}

double SpeedLimits::highest() const noexcept {
    return std::max_element(segments_.begin(), segments_.end(),
                            [](const auto& a, const auto& b) { return a.v_max < b.v_max; })
        ->v_max;
}

std::vector<double> slope_from_elevation(std::span<const ElevationSample> samples, int smoothing_window) {
    check_samples(samples);
    if (smoothing_window < 1 || smoothing_window % 2 == 0 ||
        static_cast<std::size_t>(smoothing_window) > samples.size()) {
        throw ConfigError("smoothing window must be odd, >= 1 and <= sample count");
    }

    const std::vector<double> e = moving_average(samples, smoothing_window);
    const std::size_t n = samples.size();
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        const double grade = (e[hi] - e[lo]) / (samples[hi].s - samples[lo].s);
        phi[i] = std::asin(std::clamp(grade, -1.0, 1.0));
    }
    return phi;
}

std::vector<ElevationSample> resample_uniform(std::span<const ElevationSample> samples, double step) {
    check_samples(samples);
    if (!(step > 0.0)) {
        throw ConfigError("resampling step must be positive");
    }
    const double s0 = samples.front().s;
    const double s_end = samples.back().s;
    std::vector<ElevationSample> out;
    out.reserve(static_cast<std::size_t>((s_end - s0) / step) + 2);

    std::size_t seg = 0;
    for (std::size_t k = 0;; ++k) {
        const double s = s0 + static_cast<double>(k) * step;
        // Drop a node that would sit within 1e-9 of the end point.
        if (s >= s_end - 1e-9 * std::max(1.0, std::abs(s_end))) {
            break;
        }
        while (samples[seg + 1].s < s) {
            ++seg;
        }
        out.push_back({s, interpolate(samples[seg].s, samples[seg].elevation, samples[seg + 1].s,
                                      samples[seg + 1].elevation, s)});
    }
    out.push_back(samples.back());
    return out;
}

RoadProfile::RoadProfile(std::vector<ElevationSample> samples, std::vector<double> slope, SpeedLimits limits)
    : samples_(std::move(samples)), slope_(std::move(slope)), limits_(std::move(limits)) {
    check_samples(samples_);
    if (slope_.size() != samples_.size()) {
        throw MalformedProfileError("slope array length must equal sample count");
    }
    for (double phi : slope_) {
        if (!(std::abs(phi) < std::numbers::pi / 2.0)) {
            throw MalformedProfileError("slope magnitude must stay below pi/2");
        }
    }
}

RoadProfile RoadProfile::from_elevation(std::vector<ElevationSample> samples, SpeedLimits limits,
                                        int smoothing_window) {
    auto phi = slope_from_elevation(samples, smoothing_window);
    return RoadProfile(std::move(samples), std::move(phi), std::move(limits));
}

std::size_t RoadProfile::segment_index(double s) const noexcept {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                               [](double x, const ElevationSample& e) { return x < e.s; });
    const auto idx = static_cast<std::size_t>(std::distance(samples_.begin(), it));
    return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, samples_.size() - 2);
}

double RoadProfile::slope_at(double s) const {
    if (!(s >= samples_.front().s && s <= samples_.back().s)) {
        throw OutOfRangeError("slope query at s = " + std::to_string(s) + " outside road [" +
                              std::to_string(samples_.front().s) + ", " + std::to_string(samples_.back().s) +
                              "]");
    }
    return slope_at_clamped(s);
}

double RoadProfile::slope_at_clamped(double s) const noexcept {
    s = std::clamp(s, samples_.front().s, samples_.back().s);
    const std::size_t i = segment_index(s);
    return interpolate(samples_[i].s, slope_[i], samples_[i + 1].s, slope_[i + 1], s);
}

double RoadProfile::elevation_at(double s) const {
    if (!(s >= samples_.front().s && s <= samples_.back().s)) {
        throw OutOfRangeError("elevation query outside road");
    }
    const std::size_t i = segment_index(s);
    return interpolate(samples_[i].s, samples_[i].elevation, samples_[i + 1].s, samples_[i + 1].elevation, s);
}

RoadProfile RoadProfile::with_limits(SpeedLimits limits) const {
    return RoadProfile(samples_, slope_, std::move(limits));
}

RoadProfile build_profile(std::vector<ElevationSample> samples, const SpeedLimits& limits,
                          const IngestOptions& options) {
    if (options.grid_step > 0.0) {
        samples = resample_uniform(samples, options.grid_step);
    }
    check_samples(samples);
    int window = std::max(1, options.smoothing_window);
    const auto max_window = static_cast<int>(samples.size() % 2 == 1 ? samples.size() : samples.size() - 1);
    window = std::min(window, max_window);
    if (window % 2 == 0) {
        --window;
    }
    return RoadProfile::from_elevation(std::move(samples), limits, window);
}

RoadProfile ingest_elevation_csv(std::istream& in, const SpeedLimits& limits, const IngestOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<ElevationSample> samples;

    if (!std::getline(in, line)) {
        throw ParseError(1, "missing header row");
    }
    ++line_no;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row(line);
        if (!row.empty() && row.back() == '\r') {
            row.remove_suffix(1);
        }
        if (row.find_first_not_of(" \t") == std::string_view::npos) {
            continue;
        }
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected two comma-separated columns");
        }
        const double s = parse_number(row.substr(0, comma), line_no, "s");
        const double e = parse_number(row.substr(comma + 1), line_no, "elevation");
        if (!samples.empty() && !(s > samples.back().s)) {
            throw MalformedProfileError("line " + std::to_string(line_no) +
                                        ": arc length must be strictly increasing");
        }
        samples.push_back({s, e});
    }

    if (samples.size() < 2) {
        throw ProfileTooShortError("elevation CSV has fewer than 2 data rows");
    }
    return build_profile(std::move(samples), limits, options);
}

RoadProfile ingest_elevation_csv(std::string_view text, const SpeedLimits& limits, const IngestOptions& options) {
    std::istringstream in{std::string(text)};
    return ingest_elevation_csv(in, limits, options);
}

void write_elevation_csv(std::ostream& out, std::span<const ElevationSample> samples) {
    out << "s,E\n";
    const auto old_precision = out.precision(12);
    for (const auto& e : samples) {
        out << e.s << ',' << e.elevation << '\n';
    }
    out.precision(old_precision);
}

SyntheticRoad parse_synthetic_road(std::string_view name) {
    if (name == "flat") {
        return SyntheticRoad::flat;
    }
    if (name == "hill" || name == "single-hill") {
        return SyntheticRoad::hill;
    }
    if (name == "two-hill" || name == "two_hill") {
        return SyntheticRoad::two_hill;
    }
    if (name == "hill-valley" || name == "hill_valley") {
        return SyntheticRoad::hill_valley;
    }
    throw ConfigError("unknown synthetic road kind '" + std::string(name) + "'");
}

std::vector<ElevationSample> synthetic_elevation(SyntheticRoad kind, double length, double step, double height) {
    if (!(length > 0.0) || !(step > 0.0) || step > length) {
        throw ConfigError("synthetic road needs 0 < step <= length");
    }
    const auto n = static_cast<std::size_t>(std::floor(length / step + 1e-9));
    std::vector<ElevationSample> out;
    out.reserve(n + 2);
    auto elevation = [&](double s) {
        switch (kind) {
        case SyntheticRoad::flat:
            return 0.0;
        case SyntheticRoad::hill:
            return height * raised_cosine(s, 0.35 * length, 0.5 * length);
        case SyntheticRoad::two_hill:
            return height * (raised_cosine(s, 0.25 * length, 0.3 * length) +
                             raised_cosine(s, 0.72 * length, 0.3 * length));
        case SyntheticRoad::hill_valley:
            return height * (raised_cosine(s, 0.28 * length, 0.4 * length) -
                             raised_cosine(s, 0.72 * length, 0.4 * length));
        }
        return 0.0;
    };
    for (std::size_t k = 0; k <= n; ++k) {
        const double s = static_cast<double>(k) * step;
        out.push_back({s, elevation(s)});
    }
    if (length - out.back().s > 1e-9 * length) {
        out.push_back({length, elevation(length)});
    }
    return out;
}

} // namespace ecosafe
