#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "ecosafe/cbf.hpp"
#include "ecosafe/pcc.hpp"
#include "ecosafe/road.hpp"
#include "ecosafe/sim.hpp"

namespace {

using namespace ecosafe;

RoadProfile hilly_road(double length) {
    return build_profile(synthetic_elevation(SyntheticRoad::two_hill, length, 2.5, 6.0),
                         SpeedLimits::uniform(15.0, 25.0));
}

void BM_SlopeFromElevation(benchmark::State& state) {
    std::vector<ElevationSample> samples;
    for (int i = 0; i < state.range(0); ++i) {
        samples.push_back({2.5 * i, 2.0 * std::sin(0.0125 * i)});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(slope_from_elevation(samples));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SlopeFromElevation)->Arg(1200)->Arg(12000);

void BM_QpFilter(benchmark::State& state) {
    const CriticalDistance rho{};
    double h = 30.0;
    for (auto _ : state) {
        h = h > 60.0 ? 30.0 : h + 0.01;
        benchmark::DoNotOptimize(qp_filter(barrier_eval(rho, {h, 20.0, 18.0}), 0.5, 1.0));
    }
}
BENCHMARK(BM_QpFilter);

void BM_SolveProfile(benchmark::State& state) {
    const double length = static_cast<double>(state.range(0));
    OcpSpec spec{hilly_road(length), {}, 20.0, 20.0, length / 19.0, {}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(spec));
    }
}
BENCHMARK(BM_SolveProfile)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_RunScenario(benchmark::State& state) {
    ScenarioConfig cfg;
    cfg.road.synthetic = SyntheticRoadSpec{SyntheticRoad::two_hill, 3000.0, 2.5, 6.0};
    cfg.road.limits = SpeedLimits::uniform(15.0, 25.0);
    cfg.pcc = {true, 20.0, 20.0, 3000.0 / 19.0, {}};
    cfg.t_max = 400.0;
    cfg.leaders.push_back({40.0, {{0.0, 20.0}, {60.0, 14.0}, {120.0, 22.0}, {400.0, 20.0}}, true});
    const auto prepared = prepare(cfg);
    for (auto _ : state) {
        const auto log = run(prepared);
        benchmark::DoNotOptimize(log.summary.final_energy);
        state.SetItemsProcessed(static_cast<int64_t>(log.records.size()));
    }
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
