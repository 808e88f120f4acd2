// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS
// or GLINTLAB_THREADS.

#include "glintlab/reference.hpp"
#include "glintlab/render.hpp"

#include <benchmark/benchmark.h>

using namespace glintlab;

namespace {

Execution exec_of(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

const LtcTable& table()
{
    static const LtcTable t = bake_table(NdfKind::GGX, 12);
    return t;
}

Scene bench_scene(RenderMode mode)
{
    Scene s = default_scene(5.0, 45.0, 128, 128);
    s.surface = GlintSurface(MicrofacetModel(NdfKind::GGX, 0.25), FresnelF0(1.0), 1e6, 7);
    s.render.mode = mode;
    s.render.spp = 16;
    return s;
}

void BM_RenderGlint(benchmark::State& state)
{
    const Scene s = bench_scene(RenderMode::Glint);
    for (auto _ : state) {
        benchmark::DoNotOptimize(render(s, &table(), 1, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * 128 * 128);
}

void BM_RenderSmoothLtc(benchmark::State& state)
{
    const Scene s = bench_scene(RenderMode::SmoothLtc);
    for (auto _ : state) {
        benchmark::DoNotOptimize(render(s, &table(), 1, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * 128 * 128);
}

void BM_RenderOracle(benchmark::State& state)
{
    const Scene s = bench_scene(RenderMode::Oracle);
    for (auto _ : state) {
        benchmark::DoNotOptimize(render(s, &table(), 1, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * 128 * 128);
}

void BM_Bake(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(bake_table(NdfKind::GGX, 6, exec_of(state)));
    }
}

void BM_DiscreteOracle(benchmark::State& state)
{
    const MicrofacetModel m(NdfKind::GGX, 0.25);
    const LocalQuad quad{Vec3{-0.6, -0.5, 1.0}, Vec3{0.4, -0.5, 1.0}, Vec3{0.4, 0.5, 1.0}, Vec3{-0.6, 0.5, 1.0}};
    const auto poly = SphericalPolygon::from_points(quad, {0, 0, 0});
    const Vec3 wo = normalize({0.4, 0.0, 1.0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(discrete_oracle_count(m, 1000000, poly, wo, 3, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * 1000000);
}

} // namespace

BENCHMARK(BM_RenderGlint)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderSmoothLtc)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderOracle)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bake)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1);
BENCHMARK(BM_DiscreteOracle)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv)
{
    configure_threads_from_env();
    table();  // keep the bake out of the timed loops
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) {
        return 1;
    }
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
