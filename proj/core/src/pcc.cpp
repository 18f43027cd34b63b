#include "ecosafe/pcc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "ecosafe/error.hpp"

namespace ecosafe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSpeedEps = 1e-9;

struct Grid {
    std::vector<double> s;           // N + 1 uniformly spaced nodes
    double ds = 0.0;
    std::vector<double> resistance;  // road resistance per cell, at the cell midpoint
    std::vector<double> speeds;      // M quantized speeds
    std::vector<int> lo;             // first admissible speed index per node
    std::vector<int> hi;             // last admissible speed index per node
    std::vector<double> span_time;   // [k][a][dir] travel time of a one-cell change over k cells
    int max_span = 1;
    int max_coast = 1;
    int start = 0;
    int end = 0;

    [[nodiscard]] double speed(int j) const noexcept { return speeds[static_cast<std::size_t>(j)]; }
    [[nodiscard]] std::size_t cells() const noexcept { return resistance.size(); }

    [[nodiscard]] double& span_time_at(int k, int a, int dir) noexcept {
        return span_time[(static_cast<std::size_t>(k) * speeds.size() + static_cast<std::size_t>(a)) * 2 +
                         (dir > 0 ? 1 : 0)];
    }
    [[nodiscard]] double span_time_at(int k, int a, int dir) const noexcept {
        return const_cast<Grid*>(this)->span_time_at(k, a, dir);
    }
};

struct Weights {
    double energy = 1.0;
    double time = 0.0;
};

struct Arc {
    std::size_t start = 0; // first node
    int span = 1;          // cells covered
    bool coast = false;
};

// Node-level solution: speed cell at every arc boundary.
struct Path {
    std::vector<Arc> arcs;
    std::vector<int> cells;
    double energy = 0.0;
    double time = 0.0;
};

int nearest_cell(const Grid& g, std::size_t node, double v) {
    int best = g.lo[node];
    for (int j = g.lo[node]; j <= g.hi[node]; ++j) {
        if (std::abs(g.speed(j) - v) < std::abs(g.speed(best) - v)) {
            best = j;
        }
    }
    return best;
}

// Speed after fraction c/k of an arc along which v^2 varies linearly.
double span_speed(double va, double vb, int c, int k) {
    if (c == 0) {
        return va;
    }
    if (c == k) {
        return vb;
    }
    const double va2 = va * va;
    return std::sqrt(va2 + (vb * vb - va2) * static_cast<double>(c) / static_cast<double>(k));
}

Grid build_grid(const OcpSpec& spec) {
    const auto& road = spec.road;
    const auto& set = spec.settings;
    const double s_f = road.length();

    Grid g;
    const auto cells = static_cast<std::size_t>(std::ceil(s_f / set.ds - 1e-9));
    g.ds = s_f / static_cast<double>(cells);
    g.s.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        g.s[i] = static_cast<double>(i) * g.ds;
    }
    g.s.back() = s_f;

    g.resistance.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        g.resistance[i] = road_resistance(spec.truck, road.slope_at(0.5 * (g.s[i] + g.s[i + 1])));
    }

    const double v_lo = road.limits().lowest();
    const double v_hi = road.limits().highest();
    const auto count = static_cast<std::size_t>(std::floor((v_hi - v_lo) / set.speed_step + 1e-9)) + 1;
    g.speeds.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
        g.speeds[j] = v_lo + static_cast<double>(j) * set.speed_step;
    }

    g.lo.resize(cells + 1);
    g.hi.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        const auto& lim = road.limits().at(g.s[i]);
        int lo = 0;
        while (lo < static_cast<int>(count) && g.speed(lo) < lim.v_min - kSpeedEps) {
            ++lo;
        }
        int hi = static_cast<int>(count) - 1;
        while (hi >= 0 && g.speed(hi) > lim.v_max + kSpeedEps) {
            --hi;
        }
        if (lo > hi) {
            throw MalformedSpecError("speed grid step " + std::to_string(set.speed_step) +
                                     " leaves no admissible speed at s = " + std::to_string(g.s[i]));
        }
        g.lo[i] = lo;
        g.hi[i] = hi;
    }

    g.max_span = std::max(1, std::min<int>(set.max_span, static_cast<int>(cells)));
    g.max_coast = std::max(1, std::min<int>(set.max_coast, static_cast<int>(cells)));
    g.span_time.assign(static_cast<std::size_t>(g.max_span + 1) * count * 2, kInf);
    for (int k = 2; k <= g.max_span; ++k) {
        for (int a = 0; a < static_cast<int>(count); ++a) {
            for (int dir : {-1, 1}) {
                const int b = a + dir;
                if (b < 0 || b >= static_cast<int>(count)) {
                    continue;
                }
                double t = 0.0;
                for (int c = 0; c < k; ++c) {
                    t += 0.5 * g.ds *
                         (1.0 / span_speed(g.speed(a), g.speed(b), c, k) +
                          1.0 / span_speed(g.speed(a), g.speed(b), c + 1, k));
                }
                g.span_time_at(k, a, dir) = t;
            }
        }
    }

    g.start = nearest_cell(g, 0, spec.v0);
    g.end = nearest_cell(g, cells, spec.vf);
    return g;
}

// Scaled torque on cell c of a k-cell arc from va to vb: the kinematic
// acceleration of the linear-in-v^2 path plus resistance and the cell's
// mean drag.
double cell_torque(const TruckParams& p, double resistance, double ds, double va, double vb, int c, int k) {
    const double va2 = va * va;
    const double dv2 = vb * vb - va2;
    const double kd = static_cast<double>(k);
    const double mean_v2 = va2 + dv2 * (static_cast<double>(c) + 0.5) / kd;
    return dv2 / (2.0 * ds * kd) + resistance + p.air_drag / p.effective_mass * mean_v2;
}

double arc_time(double ds, double va, double vb) {
    return 0.5 * ds * (1.0 / va + 1.0 / vb);
}

// v^2 at the end of a cell crossed with zero net torque.
double coast_v2(double v2, double resistance, double ds, double drag) {
    return (v2 * (1.0 - ds * drag) - 2.0 * ds * resistance) / (1.0 + ds * drag);
}

// Highest speed cell admissible at `node` that does not exceed v, or -1.
int cell_at_or_below(const Grid& g, std::size_t node, double v) {
    const double step = g.speeds.size() > 1 ? g.speed(1) - g.speed(0) : 1.0;
    const auto j = static_cast<int>(std::floor((v - g.speed(0)) / step + kSpeedEps));
    int b = std::min(j, g.hi[node]);
    while (b >= g.lo[node] && g.speed(b) > v) {
        --b;
    }
    return b >= g.lo[node] ? b : -1;
}

struct CellState {
    double v = 0.0;     // speed entering the cell
    double u_hat = 0.0; // scaled torque on the cell
};

// Speeds and torques along one arc. A coasting arc rolls freely and brakes
// in its last cell onto the grid speed vb.
std::vector<CellState> arc_cells(const TruckParams& p, const Grid& g, const Arc& arc, double va, double vb) {
    std::vector<CellState> out(static_cast<std::size_t>(arc.span));
    if (!arc.coast) {
        for (int c = 0; c < arc.span; ++c) {
            out[static_cast<std::size_t>(c)] = {
                span_speed(va, vb, c, arc.span),
                cell_torque(p, g.resistance[arc.start + static_cast<std::size_t>(c)], g.ds, va, vb, c, arc.span)};
        }
        return out;
    }
    const double drag = p.air_drag / p.effective_mass;
    double v2 = va * va;
    for (int c = 0; c + 1 < arc.span; ++c) {
        out[static_cast<std::size_t>(c)] = {std::sqrt(v2), 0.0};
        v2 = coast_v2(v2, g.resistance[arc.start + static_cast<std::size_t>(c)], g.ds, drag);
    }
    const double v_last = std::sqrt(v2);
    out.back() = {v_last, cell_torque(p, g.resistance[arc.start + static_cast<std::size_t>(arc.span - 1)], g.ds,
                                      v_last, vb, 0, 1)};
    return out;
}

// Calls emit(j, b, energy, time, k, coast) for every feasible arc leaving
// (node i, speed cell a). Single-cell arcs may change speed by any amount.
// Longer arcs either change it by exactly one speed cell or coast. Energy
// is only evaluated when need_energy is set.
template <class Emit>
void for_each_arc(const TruckParams& p, const Grid& g, std::size_t i, int a, bool need_energy, Emit&& emit) {
    const double drag = p.air_drag / p.effective_mass;
    const double ds = g.ds;
    const std::size_t nodes = g.s.size();
    const auto m = static_cast<int>(g.speeds.size());
    const double res = g.resistance[i];
    const int blo = g.lo[i + 1];
    const int bhi = g.hi[i + 1];
    const double va = g.speed(a);
    const double va2 = va * va;

    auto single = [&](int b, double u_hat) {
        emit(i + 1, b, std::max(u_hat, 0.0) * ds, arc_time(ds, va, g.speed(b)), 1, false);
    };
    // Accelerating arcs: torque rises and the drive cap falls with vb.
    for (int b = std::max(a + 1, blo); b <= bhi; ++b) {
        const double u_hat = cell_torque(p, res, ds, va, g.speed(b), 0, 1);
        if (u_hat > drive_limit(p, g.speed(b))) {
            break;
        }
        if (u_hat >= -p.max_brake) {
            single(b, u_hat);
        }
    }
    // Holding or decelerating arcs: torque falls with vb, the cap is fixed.
    const double cap = drive_limit(p, va);
    for (int b = std::min(a, bhi); b >= blo; --b) {
        const double u_hat = cell_torque(p, res, ds, va, g.speed(b), 0, 1);
        if (u_hat < -p.max_brake) {
            break;
        }
        if (u_hat <= cap) {
            single(b, u_hat);
        }
    }

    // One-cell speed changes spread over k cells. Range statistics of the
    // resistance grow with k, so each k costs O(1).
    for (int dir : {1, -1}) {
        const int b = a + dir;
        if (b < 0 || b >= m) {
            continue;
        }
        const double vb = g.speed(b);
        const double dv2 = vb * vb - va2;
        const double cap_b = drive_limit(p, std::max(va, vb));
        double sum_res = res;
        double min_res = res;
        double max_res = res;
        int lo_run = std::max(g.lo[i], g.lo[i + 1]);
        int hi_run = std::min(g.hi[i], g.hi[i + 1]);
        for (int k = 2; k <= g.max_span && i + static_cast<std::size_t>(k) < nodes; ++k) {
            const std::size_t j = i + static_cast<std::size_t>(k);
            const double r = g.resistance[j - 1];
            sum_res += r;
            min_res = std::min(min_res, r);
            max_res = std::max(max_res, r);
            lo_run = std::max(lo_run, g.lo[j]);
            hi_run = std::min(hi_run, g.hi[j]);
            if (std::min(a, b) < lo_run || std::max(a, b) > hi_run) {
                break;
            }
            const double kd = static_cast<double>(k);
            const double a_kin = dv2 / (2.0 * ds * kd);
            const double q_first = va2 + dv2 * 0.5 / kd;
            const double q_last = va2 + dv2 * (kd - 0.5) / kd;
            const double u_hi = a_kin + max_res + drag * std::max(q_first, q_last);
            const double u_lo = a_kin + min_res + drag * std::min(q_first, q_last);
            if (u_hi > cap_b || u_lo < -p.max_brake) {
                continue;
            }
            double work = 0.0;
            if (need_energy) {
                if (u_lo >= 0.0) {
                    work = (dv2 / (2.0 * ds) + sum_res + drag * kd * 0.5 * (va2 + vb * vb)) * ds;
                } else {
                    for (int c = 0; c < k; ++c) {
                        work += std::max(
                            cell_torque(p, g.resistance[i + static_cast<std::size_t>(c)], ds, va, vb, c, k), 0.0);
                    }
                    work *= ds;
                }
            }
            emit(j, b, work, g.span_time_at(k, a, dir), k, false);
        }
    }

    // Coasting arcs cost no energy.
    double v = va;
    double v2 = va2;
    double t = 0.0;
    for (int k = 1; k <= g.max_coast && i + static_cast<std::size_t>(k) < nodes; ++k) {
        const std::size_t j = i + static_cast<std::size_t>(k);
        const double r = g.resistance[j - 1];
        const double next = coast_v2(v2, r, ds, drag);
        const double v_next = next > 0.0 ? std::sqrt(next) : 0.0;
        if (k >= 2) {
            const int b = cell_at_or_below(g, j, v_next);
            if (b >= 0) {
                const double vb = g.speed(b);
                const double u_last = cell_torque(p, r, ds, v, vb, 0, 1);
                if (u_last <= 0.0 && u_last >= -p.max_brake) {
                    emit(j, b, 0.0, t + arc_time(ds, v, vb), k, true);
                }
            }
        }
        if (v_next < g.speed(g.lo[j]) - kSpeedEps || v_next > g.speed(g.hi[j]) + kSpeedEps) {
            break;
        }
        t += arc_time(ds, v, v_next);
        v = v_next;
        v2 = next;
    }
}

// Energy and time of a reconstructed path, cell by cell.
void measure(const TruckParams& p, const Grid& g, Path& path) {
    path.energy = 0.0;
    path.time = 0.0;
    for (std::size_t n = 0; n < path.arcs.size(); ++n) {
        const double vb = g.speed(path.cells[n + 1]);
        const auto cells = arc_cells(p, g, path.arcs[n], g.speed(path.cells[n]), vb);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            path.energy += std::max(cells[c].u_hat, 0.0) * g.ds;
            path.time += arc_time(g.ds, cells[c].v, c + 1 < cells.size() ? cells[c + 1].v : vb);
        }
    }
}

// Forward DP over (node, speed cell) minimizing the weighted cost. Ties go
// to the lowest-speed predecessor.
std::optional<Path> run_dp(const OcpSpec& spec, const Grid& g, Weights w) {
    const std::size_t nodes = g.s.size();
    const std::size_t m = g.speeds.size();

    std::vector<double> cost(nodes * m, kInf);
    std::vector<std::int32_t> pred_cell(nodes * m, -1);
    std::vector<std::uint8_t> pred_span(nodes * m, 0);
    std::vector<std::uint8_t> pred_coast(nodes * m, 0);
    cost[static_cast<std::size_t>(g.start)] = 0.0;

    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        for (int a = g.lo[i]; a <= g.hi[i]; ++a) {
            const double ca = cost[i * m + static_cast<std::size_t>(a)];
            if (ca == kInf) {
                continue;
            }
            for_each_arc(spec.truck, g, i, a, w.energy != 0.0,
                         [&](std::size_t j, int b, double energy, double time, int k, bool coast) {
                             const double c = ca + w.energy * energy + w.time * time;
                             const std::size_t idx = j * m + static_cast<std::size_t>(b);
                             if (c < cost[idx] || (c == cost[idx] && a < pred_cell[idx])) {
                                 cost[idx] = c;
                                 pred_cell[idx] = a;
                                 pred_span[idx] = static_cast<std::uint8_t>(k);
                                 pred_coast[idx] = coast ? 1 : 0;
                             }
                         });
        }
    }

    if (cost[(nodes - 1) * m + static_cast<std::size_t>(g.end)] == kInf) {
        return std::nullopt;
    }

    Path path;
    std::size_t node = nodes - 1;
    int cell = g.end;
    path.cells.push_back(cell);
    while (node > 0) {
        const std::size_t idx = node * m + static_cast<std::size_t>(cell);
        const int k = pred_span[idx];
        node -= static_cast<std::size_t>(k);
        cell = pred_cell[idx];
        path.arcs.push_back({node, k, pred_coast[idx] != 0});
        path.cells.push_back(cell);
    }
    std::reverse(path.arcs.begin(), path.arcs.end());
    std::reverse(path.cells.begin(), path.cells.end());
    measure(spec.truck, g, path);
    return path;
}

// Least weighted cost from every (node, speed cell) to the final state.
std::vector<double> cost_to_go(const OcpSpec& spec, const Grid& g, Weights w) {
    const std::size_t nodes = g.s.size();
    const std::size_t m = g.speeds.size();
    std::vector<double> to_go(nodes * m, kInf);
    to_go[(nodes - 1) * m + static_cast<std::size_t>(g.end)] = 0.0;
    for (std::size_t i = nodes - 1; i-- > 0;) {
        for (int a = g.lo[i]; a <= g.hi[i]; ++a) {
            double best = kInf;
            for_each_arc(spec.truck, g, i, a, w.energy != 0.0,
                         [&](std::size_t j, int b, double energy, double time, int, bool) {
                             best = std::min(best, w.energy * energy + w.time * time +
                                                       to_go[j * m + static_cast<std::size_t>(b)]);
                         });
            to_go[i * m + static_cast<std::size_t>(a)] = best;
        }
    }
    return to_go;
}

struct Bounds {
    std::vector<double> min_time; // fastest completion from each state
    std::vector<double> priced;   // least energy + lambda * time to go
    double lambda = 0.0;
};

enum class SearchOutcome { found, none, budget };

// Least-energy path within the time budget among those whose Lagrangian
// lower bound stays below `bar`. Labels are Pareto-pruned per state. Any
// path found is optimal overall, because cheaper paths would have kept
// every label of theirs.
SearchOutcome label_search(const OcpSpec& spec, const Grid& g, const Bounds& bounds, double bar, Path& out) {
    const std::size_t nodes = g.s.size();
    const std::size_t m = g.speeds.size();
    const double t_max = spec.t_max;
    const double lambda = bounds.lambda;

    struct Label {
        double t;
        double e;
        std::int32_t parent;
        std::int32_t cell;
        std::uint32_t node;
        std::uint8_t span;
        bool coast;
    };
    std::vector<Label> labels;
    labels.push_back({0.0, 0.0, -1, g.start, 0, 0, false});
    // Per state: label indices sorted by time with strictly falling energy.
    std::vector<std::vector<std::int32_t>> fronts(nodes * m);
    fronts[static_cast<std::size_t>(g.start)].push_back(0);

    auto insert = [&](std::vector<std::int32_t>& f, const Label& l) {
        auto pos = std::upper_bound(f.begin(), f.end(), l.t,
                                    [&](double t, std::int32_t x) { return t < labels[static_cast<std::size_t>(x)].t; });
        if (pos != f.begin() && labels[static_cast<std::size_t>(*std::prev(pos))].e <= l.e) {
            return;
        }
        auto first = pos;
        while (first != f.begin() && labels[static_cast<std::size_t>(*std::prev(first))].t == l.t) {
            --first;
        }
        auto last = pos;
        while (last != f.end() && labels[static_cast<std::size_t>(*last)].e >= l.e) {
            ++last;
        }
        pos = f.erase(first, last);
        f.insert(pos, static_cast<std::int32_t>(labels.size()));
        labels.push_back(l);
    };

    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        for (int a = g.lo[i]; a <= g.hi[i]; ++a) {
            auto& front = fronts[i * m + static_cast<std::size_t>(a)];
            for (const std::int32_t id : front) {
                const Label from = labels[static_cast<std::size_t>(id)];
                for_each_arc(spec.truck, g, i, a, true,
                             [&](std::size_t j, int b, double energy, double time, int k, bool coast) {
                                 const std::size_t to = j * m + static_cast<std::size_t>(b);
                                 const double t = from.t + time;
                                 const double e = from.e + energy;
                                 if (t + bounds.min_time[to] > t_max ||
                                     e + lambda * (t - t_max) + bounds.priced[to] >= bar) {
                                     return;
                                 }
                                 insert(fronts[to], {t, e, id, b, static_cast<std::uint32_t>(j),
                                                     static_cast<std::uint8_t>(k), coast});
                             });
                if (labels.size() > spec.settings.max_labels) {
                    return SearchOutcome::budget;
                }
            }
            std::vector<std::int32_t>().swap(front);
        }
    }

    const auto& last = fronts[(nodes - 1) * m + static_cast<std::size_t>(g.end)];
    if (last.empty()) {
        return SearchOutcome::none;
    }
    Path path;
    for (std::int32_t id = last.back(); id >= 0;) {
        const Label& l = labels[static_cast<std::size_t>(id)];
        path.cells.push_back(l.cell);
        if (l.parent >= 0) {
            path.arcs.push_back({l.node - l.span, l.span, l.coast});
        }
        id = l.parent;
    }
    std::reverse(path.arcs.begin(), path.arcs.end());
    std::reverse(path.cells.begin(), path.cells.end());
    measure(spec.truck, g, path);
    out = std::move(path);
    return SearchOutcome::found;
}

// Closes the gap between a feasible path and the Lagrangian lower bound at
// price lambda. The search bar starts just above the bound and widens
// geometrically up to the incumbent's energy.
std::optional<Path> refine(const OcpSpec& spec, const Grid& g, double lambda, const Path& incumbent) {
    if (spec.settings.max_labels == 0) {
        return std::nullopt;
    }
    Bounds bounds{cost_to_go(spec, g, {0.0, 1.0}), cost_to_go(spec, g, {1.0, lambda}), lambda};
    const double lower = bounds.priced[static_cast<std::size_t>(g.start)] - lambda * spec.t_max;
    const double ceiling = incumbent.energy - 1e-9 * std::max(1.0, incumbent.energy);
    double slack = 1e-3 * std::max(1.0, std::abs(lower));
    for (;;) {
        const double bar = std::min(lower + slack, ceiling);
        Path found;
        switch (label_search(spec, g, bounds, bar, found)) {
        case SearchOutcome::found:
            if (found.time <= spec.t_max && found.energy < incumbent.energy) {
                return found;
            }
            return std::nullopt;
        case SearchOutcome::budget:
            return std::nullopt;
        case SearchOutcome::none:
            break;
        }
        if (bar >= ceiling) {
            return std::nullopt;
        }
        slack *= 4.0;
    }
}

// Mixes two paths at the states they share: between consecutive shared
// states either path's arcs may be used. Returns the least-energy mix
// within the time budget if it beats `feasible`.
std::optional<Path> splice(const OcpSpec& spec, const Grid& g, const Path& slow, const Path& feasible) {
    const std::size_t nodes = g.s.size();
    struct Segment {
        std::size_t first = 0; // arc range [first, last)
        std::size_t last = 0;
        double e = 0.0;
        double t = 0.0;
    };
    auto boundaries = [&](const Path& p) {
        std::vector<int> at(nodes, -1);
        at[0] = p.cells.front();
        for (std::size_t n = 0; n < p.arcs.size(); ++n) {
            at[p.arcs[n].start + static_cast<std::size_t>(p.arcs[n].span)] = p.cells[n + 1];
        }
        return at;
    };
    const auto at_slow = boundaries(slow);
    const auto at_fast = boundaries(feasible);
    std::vector<std::size_t> cuts;
    for (std::size_t i = 1; i < nodes; ++i) {
        if (at_slow[i] >= 0 && at_slow[i] == at_fast[i]) {
            cuts.push_back(i);
        }
    }
    if (cuts.size() < 2) {
        return std::nullopt;
    }
    auto segments = [&](const Path& p) {
        std::vector<Segment> out;
        Segment cur;
        std::size_t c = 0;
        for (std::size_t n = 0; n < p.arcs.size(); ++n) {
            const auto cells = arc_cells(spec.truck, g, p.arcs[n], g.speed(p.cells[n]), g.speed(p.cells[n + 1]));
            for (std::size_t k = 0; k < cells.size(); ++k) {
                cur.e += std::max(cells[k].u_hat, 0.0) * g.ds;
                cur.t += arc_time(g.ds, cells[k].v, k + 1 < cells.size() ? cells[k + 1].v : g.speed(p.cells[n + 1]));
            }
            if (p.arcs[n].start + static_cast<std::size_t>(p.arcs[n].span) == cuts[c]) {
                cur.last = n + 1;
                out.push_back(cur);
                cur = Segment{n + 1, n + 1, 0.0, 0.0};
                ++c;
            }
        }
        return out;
    };
    const auto x = segments(slow);
    const auto y = segments(feasible);

    // Pareto knapsack over segments: choice 0 takes the slow path's arcs.
    struct Label {
        double t;
        double e;
        std::int32_t parent;
        bool fast;
    };
    std::vector<Label> pool;
    std::vector<std::int32_t> front{-1};
    std::vector<double> min_rest(x.size() + 1, 0.0);
    for (std::size_t k = x.size(); k-- > 0;) {
        min_rest[k] = min_rest[k + 1] + std::min(x[k].t, y[k].t);
    }
    constexpr std::size_t kMaxFront = 1u << 14;
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::vector<std::int32_t> next;
        next.reserve(2 * front.size());
        for (const std::int32_t id : front) {
            const double t0 = id < 0 ? 0.0 : pool[static_cast<std::size_t>(id)].t;
            const double e0 = id < 0 ? 0.0 : pool[static_cast<std::size_t>(id)].e;
            for (const bool fast : {false, true}) {
                const auto& seg = fast ? y[k] : x[k];
                if (t0 + seg.t + min_rest[k + 1] <= spec.t_max) {
                    next.push_back(static_cast<std::int32_t>(pool.size()));
                    pool.push_back({t0 + seg.t, e0 + seg.e, id, fast});
                }
            }
        }
        std::sort(next.begin(), next.end(), [&](std::int32_t a, std::int32_t b) {
            const auto& la = pool[static_cast<std::size_t>(a)];
            const auto& lb = pool[static_cast<std::size_t>(b)];
            return la.t < lb.t || (la.t == lb.t && la.e < lb.e);
        });
        front.clear();
        for (const std::int32_t id : next) {
            if (front.empty() || pool[static_cast<std::size_t>(id)].e < pool[static_cast<std::size_t>(front.back())].e) {
                front.push_back(id);
            }
        }
        if (front.size() > kMaxFront || front.empty()) {
            return std::nullopt;
        }
    }

    std::vector<bool> use_fast(x.size());
    std::int32_t id = front.back();
    for (std::size_t k = x.size(); k-- > 0;) {
        use_fast[k] = pool[static_cast<std::size_t>(id)].fast;
        id = pool[static_cast<std::size_t>(id)].parent;
    }
    Path mixed;
    mixed.cells.push_back(feasible.cells.front());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const Path& src = use_fast[k] ? feasible : slow;
        const auto& seg = use_fast[k] ? y[k] : x[k];
        for (std::size_t n = seg.first; n < seg.last; ++n) {
            mixed.arcs.push_back(src.arcs[n]);
            mixed.cells.push_back(src.cells[n + 1]);
        }
    }
    measure(spec.truck, g, mixed);
    if (mixed.time > spec.t_max || mixed.energy >= feasible.energy) {
        return std::nullopt;
    }
    return mixed;
}

OptimalProfile to_profile(const OcpSpec& spec, const Grid& g, const Path& path, double multiplier) {
    const std::size_t nodes = g.s.size();
    OptimalProfile out;
    out.s = g.s;
    out.v.resize(nodes);
    out.u_dr.resize(nodes);
    out.u_br.resize(nodes);
    out.energy.resize(nodes);
    double w = 0.0;
    out.energy[0] = 0.0;
    for (std::size_t n = 0; n < path.arcs.size(); ++n) {
        const auto& arc = path.arcs[n];
        const auto cells = arc_cells(spec.truck, g, arc, g.speed(path.cells[n]), g.speed(path.cells[n + 1]));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::size_t node = arc.start + c;
            out.v[node] = cells[c].v;
            out.u_dr[node] = std::max(cells[c].u_hat, 0.0);
            out.u_br[node] = std::min(cells[c].u_hat, 0.0);
            w += out.u_dr[node] * g.ds;
            out.energy[node + 1] = w;
        }
    }
    out.v[nodes - 1] = g.speed(path.cells.back());
    out.u_dr[nodes - 1] = out.u_dr[nodes - 2];
    out.u_br[nodes - 1] = out.u_br[nodes - 2];
    out.travel_time = travel_time(out);
    out.multiplier = multiplier;
    out.v0_mismatch = out.v.front() - spec.v0;
    out.vf_mismatch = out.v.back() - spec.vf;
    return out;
}

void validate_spec(const OcpSpec& spec) {
    spec.truck.validate();
    const auto& set = spec.settings;
    if (!(set.ds > 0.0) || !(set.speed_step > 0.0) || !(set.time_tolerance >= 0.0) || set.max_bisections < 0 ||
        set.max_span < 1 || set.max_span > 255 || set.max_coast < 1 || set.max_coast > 255) {
        throw MalformedSpecError("solver settings need ds > 0, speed_step > 0, time_tolerance >= 0 and "
                                 "max_span, max_coast in [1, 255]");
    }
    const auto& road = spec.road;
    const double s_f = road.length();
    if (!(s_f > 0.0)) {
        throw MalformedSpecError("road has zero length");
    }
    if (spec.v0 < road.v_min_at(0.0) || spec.v0 > road.v_max_at(0.0)) {
        throw MalformedSpecError("initial speed outside the speed limits at s = 0");
    }
    if (spec.vf < road.v_min_at(s_f) || spec.vf > road.v_max_at(s_f)) {
        throw MalformedSpecError("final speed outside the speed limits at s_f");
    }
    const double t_lower = s_f / road.limits().highest();
    if (!(spec.t_max >= t_lower)) {
        throw InfeasibleError(t_lower, "travel-time budget " + std::to_string(spec.t_max) +
                                           " s is below the minimum achievable " + std::to_string(t_lower) + " s");
    }
}

} // namespace

double OptimalProfile::speed_at(double pos) const noexcept {
    if (s.empty()) {
        return 0.0;
    }
    if (pos <= s.front()) {
        return v.front();
    }
    if (pos >= s.back()) {
        return v.back();
    }
    const auto it = std::upper_bound(s.begin(), s.end(), pos);
    const auto i = static_cast<std::size_t>(std::distance(s.begin(), it)) - 1;
    const double t = (pos - s[i]) / (s[i + 1] - s[i]);
    return v[i] + t * (v[i + 1] - v[i]);
}

OptimalProfile solve(const OcpSpec& spec) {
    validate_spec(spec);
    const Grid g = build_grid(spec);

    const auto fastest = run_dp(spec, g, {0.0, 1.0});
    if (!fastest) {
        throw InfeasibleError(kInf, "no speed profile satisfies the input and speed limits on this road");
    }
    if (fastest->time > spec.t_max) {
        throw InfeasibleError(fastest->time, "travel-time budget " + std::to_string(spec.t_max) +
                                                 " s is below the minimum achievable " +
                                                 std::to_string(fastest->time) + " s");
    }

    auto at = [&](double lambda) { return *run_dp(spec, g, {1.0, lambda}); };

    Path best = at(0.0);
    if (best.time <= spec.t_max) {
        return to_profile(spec, g, best, 0.0);
    }

    double lo = 0.0;
    double hi = 1.0;
    Path slow = std::move(best);
    std::optional<Path> feasible;
    for (int k = 0; k < 40; ++k, hi *= 4.0) {
        Path p = at(hi);
        if (p.time <= spec.t_max) {
            feasible = std::move(p);
            break;
        }
        lo = hi;
        slow = std::move(p);
    }
    if (!feasible) {
        return to_profile(spec, g, *fastest, kInf);
    }

    const auto& set = spec.settings;
    for (int k = 0; k < set.max_bisections && spec.t_max - feasible->time >= set.time_tolerance; ++k) {
        const double mid = 0.5 * (lo + hi);
        Path p = at(mid);
        if (p.time <= spec.t_max) {
            hi = mid;
            feasible = std::move(p);
        } else {
            lo = mid;
            slow = std::move(p);
        }
    }
    Path incumbent = std::move(*feasible);
    if (auto mixed = splice(spec, g, slow, incumbent)) {
        incumbent = std::move(*mixed);
    }
    if (auto better = refine(spec, g, hi, incumbent)) {
        incumbent = std::move(*better);
    }
    return to_profile(spec, g, incumbent, hi);
}

std::vector<double> energy(std::span<const TrajectorySample> trajectory) {
    std::vector<double> w(trajectory.size(), 0.0);
    for (std::size_t k = 1; k < trajectory.size(); ++k) {
        const auto& a = trajectory[k - 1];
        const auto& b = trajectory[k];
        const double dt = b.t - a.t;
        if (!(dt >= 0.0)) {
            throw MalformedTrajectoryError("trajectory time decreases at sample " + std::to_string(k));
        }
        w[k] = w[k - 1] + 0.5 * (a.u_dr * a.v + b.u_dr * b.v) * dt;
    }
    return w;
}

double u_dr_from_accel(const TruckParams& p, double phi, double v, double v_dot) noexcept {
    return std::max(0.0, v_dot + road_resistance(p, phi) + air_drag(p, v));
}

double travel_time(std::span<const double> s, std::span<const double> v) {
    if (s.size() != v.size()) {
        throw MalformedTrajectoryError("position and speed arrays differ in length");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) {
            throw DivisionHazardError("travel time needs positive speed everywhere (node " + std::to_string(i) + ")");
        }
    }
    double t = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        t += 0.5 * (1.0 / v[i - 1] + 1.0 / v[i]) * (s[i] - s[i - 1]);
    }
    return t;
}

double travel_time(const OptimalProfile& profile) {
    return travel_time(profile.s, profile.v);
}

std::vector<TrajectorySample> profile_trajectory(const OptimalProfile& profile) {
    std::vector<TrajectorySample> out;
    if (profile.s.size() < 2) {
        return out;
    }
    out.reserve(2 * (profile.s.size() - 1));
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < profile.s.size(); ++i) {
        const double ds = profile.s[i + 1] - profile.s[i];
        const double dt = 2.0 * ds / (profile.v[i] + profile.v[i + 1]);
        out.push_back({t, profile.v[i], profile.u_dr[i]});
        t += dt;
        out.push_back({t, profile.v[i + 1], profile.u_dr[i]});
    }
    return out;
}

void write_profile_csv(std::ostream& out, const OptimalProfile& profile) {
    out << "s,v_pcc,u_dr,u_br,w\n";
    const auto old_precision = out.precision(12);
    for (std::size_t i = 0; i < profile.s.size(); ++i) {
        out << profile.s[i] << ',' << profile.v[i] << ',' << profile.u_dr[i] << ',' << profile.u_br[i] << ','
            << profile.energy[i] << '\n';
    }
    out.precision(old_precision);
}

} // namespace ecosafe
