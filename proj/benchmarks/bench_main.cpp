#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <varorder/elliptic.hpp>
#include <varorder/exponent_fit.hpp>
#include <varorder/forward.hpp>
#include <varorder/timedomain.hpp>

using namespace varorder;

namespace {

void BM_AssembleAndFactor(benchmark::State& state)
{
    const auto mesh = std::make_shared<const Mesh>(build_disk_mesh_rings(static_cast<int>(state.range(0))));
    const auto sigma = ScalarField::constant(*mesh, Placement::vertex, 1.0);
    const auto c = ScalarField::constant(*mesh, Placement::vertex, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(mesh, sigma, c));
    }
    state.counters["vertices"] = mesh->vertex_count();
}
BENCHMARK(BM_AssembleAndFactor)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state)
{
    const auto mesh = std::make_shared<const Mesh>(build_disk_mesh_rings(static_cast<int>(state.range(0))));
    const auto sys = assemble(mesh, ScalarField::constant(*mesh, Placement::vertex, 1.0),
                              ScalarField::constant(*mesh, Placement::vertex, 0.5));
    const Eigen::VectorXd load = Eigen::VectorXd::Ones(mesh->vertex_count());
    for (auto _ : state) {
        benchmark::DoNotOptimize(sys.solve(load));
    }
}
BENCHMARK(BM_Solve)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_FluxCurve(benchmark::State& state)
{
    const auto mesh = std::make_shared<const Mesh>(build_disk_mesh_rings(20));
    const auto cfg = CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, 0.5));
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const int x0 = boundary_point_index(*mesh, {1.0, 0.0}).vertex;
    const auto grid = log_grid(1e-8, 1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(flux_curve(cfg, ex, x0, grid));
    }
}
BENCHMARK(BM_FluxCurve)->Arg(17)->Unit(benchmark::kMillisecond);

void BM_OnlineConvolution(benchmark::State& state)
{
    const int sources = static_cast<int>(state.range(0));
    const int channels = 256;
    std::vector<std::vector<double>> kernels(1, std::vector<double>(OnlineConvolution::kernel_length(sources)));
    for (std::size_t m = 0; m < kernels[0].size(); ++m) {
        kernels[0][m] = std::pow(static_cast<double>(m) + 1.0, -0.5);
    }
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    std::vector<double> x(static_cast<std::size_t>(channels));
    for (auto& v : x) {
        v = nd(rng);
    }
    for (auto _ : state) {
        OnlineConvolution conv(kernels, channels, sources);
        for (int i = 0; i < sources; ++i) {
            conv.push(x.data());
        }
        benchmark::DoNotOptimize(conv.target(0, sources));
    }
    state.SetComplexityN(sources);
}
BENCHMARK(BM_OnlineConvolution)->RangeMultiplier(4)->Range(256, 16384)->Complexity()->Unit(benchmark::kMillisecond);

void BM_FitPowerSum(benchmark::State& state)
{
    const auto p = log_grid(1e-8, 1e-2, 30);
    std::vector<double> g;
    for (double v : p) {
        g.push_back(3.0 * std::pow(v, 0.4) + 1.5 * std::pow(v, 0.7) - 0.2 * std::pow(v, 0.95));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_power_sum(p, g, false));
    }
}
BENCHMARK(BM_FitPowerSum)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
