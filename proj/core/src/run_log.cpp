#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ecosafe/error.hpp"
#include "ecosafe/sim.hpp"

namespace ecosafe {

namespace {

constexpr std::string_view kRunHeader = "t,s,v,h_r,v1_r,h_c,v1_c,u_acc,u_ccc,u_pcc,u,active,u_dr,w";
constexpr std::size_t kRunColumns = 14;

// Shortest representation that reads back to the same double.
void put(std::ostream& out, double x) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    out.write(buf.data(), res.ptr - buf.data());
}

void put(std::ostream& out, const std::optional<double>& x) {
    if (x) {
        put(out, *x);
    }
}

std::optional<double> field(std::string_view text, std::size_t line) {
    if (text.empty()) {
        return std::nullopt;
    }
    double x = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError(line, "bad number '" + std::string(text) + "'");
    }
    return x;
}

double required(std::string_view text, std::size_t line) {
    auto x = field(text, line);
    if (!x) {
        throw ParseError(line, "missing required value");
    }
    return *x;
}

ControllerId parse_controller(std::string_view name, std::size_t line) {
    for (auto id : {ControllerId::acc, ControllerId::ccc, ControllerId::pcc, ControllerId::cruise}) {
        if (to_string(id) == name) {
            return id;
        }
    }
    throw ParseError(line, "unknown controller '" + std::string(name) + "'");
}

} // namespace

void write_run_csv(std::ostream& out, const RunLog& log) {
    out << kRunHeader << '\n';
    for (const auto& r : log.records) {
        put(out, r.t);
        out << ',';
        put(out, r.s);
        out << ',';
        put(out, r.v);
        for (const auto* x : {&r.h_r, &r.v1_r, &r.h_c, &r.v1_c, &r.u_acc, &r.u_ccc, &r.u_pcc}) {
            out << ',';
            put(out, *x);
        }
        out << ',';
        put(out, r.u);
        out << ',' << to_string(r.active) << ',';
        put(out, r.u_dr);
        out << ',';
        put(out, r.w);
        out << '\n';
    }
}

RunLog read_run_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) {
        throw ParseError(lineno, "empty run log");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kRunHeader) {
        throw ParseError(lineno, "unexpected header");
    }
    RunLog log;
    std::array<std::string_view, kRunColumns> cols;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::string_view rest = line;
        std::size_t n = 0;
        while (true) {
            const auto comma = rest.find(',');
            if (n == kRunColumns) {
                throw ParseError(lineno, "too many fields");
            }
            cols[n++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (n != kRunColumns) {
            throw ParseError(lineno, "expected 14 fields");
        }
        StepRecord r;
        r.t = required(cols[0], lineno);
        r.s = required(cols[1], lineno);
        r.v = required(cols[2], lineno);
        r.h_r = field(cols[3], lineno);
        r.v1_r = field(cols[4], lineno);
        r.h_c = field(cols[5], lineno);
        r.v1_c = field(cols[6], lineno);
        r.u_acc = field(cols[7], lineno);
        r.u_ccc = field(cols[8], lineno);
        r.u_pcc = field(cols[9], lineno);
        r.u = required(cols[10], lineno);
        r.active = parse_controller(cols[11], lineno);
        r.u_dr = required(cols[12], lineno);
        r.w = required(cols[13], lineno);
        if (r.h_r) {
            r.gap = *r.h_r;
        } else if (r.h_c) {
            r.gap = *r.h_c;
        }
        log.records.push_back(r);
    }
    if (log.records.size() >= 2) {
        log.dt = log.records[1].t - log.records[0].t;
    }
    log.summary = summarize(log);
    return log;
}

void write_summary_json(std::ostream& out, const RunSummary& summary) {
    nlohmann::ordered_json j;
    j["final_energy_J_per_kg"] = summary.final_energy;
    if (std::isfinite(summary.min_headway)) {
        j["min_headway_m"] = summary.min_headway;
    } else {
        j["min_headway_m"] = nullptr;
    }
    j["finish_time_s"] = summary.finish_time;
    j["switch_count"] = summary.switch_count;
    j["collision"] = summary.collision;
    if (summary.saving_pct) {
        j["saving_vs_baseline_pct"] = *summary.saving_pct;
    }
    out << j.dump(2) << '\n';
}

} // namespace ecosafe
