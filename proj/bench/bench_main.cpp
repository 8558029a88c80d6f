// Serial reference kernels against their OpenMP counterparts.

#include "fmci/ci.hpp"
#include "fmci/mc.hpp"
#include "fmci/sketch.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <string_view>
#include <vector>

namespace {

using fmci::mc::Exec;

Exec exec_of(const benchmark::State& state) {
    return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_SketchBuild(benchmark::State& state) {
    std::vector<std::string> objects;
    for (int i = 0; i < 100000; ++i) objects.push_back("bench-" + std::to_string(i));
    const std::vector<std::string_view> views(objects.begin(), objects.end());
    const fmci::sketch::SketchParams params{4, 4, 4};
    for (auto _ : state) {
        auto s = state.range(0) == 0 ? fmci::sketch::build_serial(params, views)
                                     : fmci::sketch::build_parallel(params, views);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(objects.size()));
    label(state);
}

void BM_PValues(benchmark::State& state) {
    fmci::mc::McConfig cfg;
    cfg.params = {4, 1, 4};
    cfg.f0 = 500;
    cfg.alpha = 0.9;
    cfg.samples = 2000;
    cfg.exec = exec_of(state);
    for (auto _ : state) {
        auto r = fmci::mc::simulate_pvalues(cfg);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.samples));
    label(state);
}

void BM_Coverage(benchmark::State& state) {
    fmci::mc::McConfig cfg;
    cfg.params = {2, 2, 4};
    cfg.f0 = 500;
    cfg.samples = 500;
    cfg.exec = exec_of(state);
    for (auto _ : state) {
        auto r = fmci::mc::coverage_experiment(cfg, fmci::ci::OneSidedUpper{0.9});
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.samples));
    label(state);
}

}  // namespace

BENCHMARK(BM_SketchBuild)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PValues)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Coverage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
