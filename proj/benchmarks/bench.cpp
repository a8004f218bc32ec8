#include "chfe/campaigns.hpp"
#include "chfe/energy.hpp"
#include "chfe/groundstate.hpp"

#include <benchmark/benchmark.h>

using namespace chfe;

static void BM_SolvePsiConstant(benchmark::State& st)
{
    const CurvatureProfile c = CurvatureProfile::constant(1.0);
    for (auto _ : st) benchmark::DoNotOptimize(solve_psi(c, static_cast<double>(st.range(0))));
}
BENCHMARK(BM_SolvePsiConstant)->Arg(10)->Arg(100)->Arg(1000);

static void BM_SolvePsiPower(benchmark::State& st)
{
    const CurvatureProfile c = CurvatureProfile::power(2.0, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(solve_psi(c, 10.0));
}
BENCHMARK(BM_SolvePsiPower);

static void BM_KernelMatrix(benchmark::State& st)
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const Potential h = Potential::sinh_power(3.0, 1.0);
    const auto r = uniform_grid(8.0, static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(KernelMatrix(m, r, h, 64));
}
BENCHMARK(BM_KernelMatrix)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_MinimizerIteration(benchmark::State& st)
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const Potential h = Potential::sinh_power(3.0, 1.0);
    const KernelMatrix K(m, uniform_grid(8.0, static_cast<std::size_t>(st.range(0))), h, 64);
    MinimizeOptions o;
    o.grid_size = static_cast<std::size_t>(st.range(0));
    o.max_iterations = 1;
    for (auto _ : st) benchmark::DoNotOptimize(minimize_radial(m, 0.5, h, K, std::nullopt, o));
}
BENCHMARK(BM_MinimizerIteration)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_CarlsonLevinCampaign(benchmark::State& st)
{
    CampaignOptions o;
    for (auto _ : st) benchmark::DoNotOptimize(carlson_levin_campaign(100, o));
}
BENCHMARK(BM_CarlsonLevinCampaign)->Unit(benchmark::kMillisecond);

static void BM_ConvexityCampaign(benchmark::State& st)
{
    CampaignOptions o;
    for (auto _ : st) benchmark::DoNotOptimize(convexity_campaign(10, o, {1000, true, 1e-9}));
}
BENCHMARK(BM_ConvexityCampaign)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
