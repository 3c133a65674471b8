#include <benchmark/benchmark.h>

#include <cmath>

#include "stefan/cutcell.hpp"
#include "stefan/levelset.hpp"
#include "stefan/stefan.hpp"

using namespace stefan;

namespace {

LevelSet flower(int n) {
  return LevelSet::from(Grid(n, {-2.0, -2.0}, 4.0), [](Vec2 p) {
    const double r = norm(p);
    const double th = std::atan2(p.y, p.x);
    return r - 0.5 * (1.0 + 0.15 * std::cos(4.0 * th));
  });
}

}  // namespace

static void BM_ComputeGeometry(benchmark::State& state) {
  const LevelSet ls = flower(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_geometry(ls, Phase::Solid));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_ComputeGeometry)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oN);

static void BM_Redistance(benchmark::State& state) {
  const LevelSet ls = flower(static_cast<int>(state.range(0)));
  RedistanceOptions opt;
  opt.band = 6.0 * ls.grid().dx();
  const int iters = redistance_iterations();
  for (auto _ : state) benchmark::DoNotOptimize(redistance(ls, iters, 0.3 * ls.grid().dx(), opt));
}
BENCHMARK(BM_Redistance)->RangeMultiplier(2)->Range(64, 256);

static void BM_Curvature(benchmark::State& state) {
  const LevelSet ls = flower(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curvature(ls));
}
BENCHMARK(BM_Curvature)->RangeMultiplier(2)->Range(64, 512);

static void BM_ExtendVelocity(benchmark::State& state) {
  const LevelSet ls = flower(static_cast<int>(state.range(0)));
  const CutGeometry g = compute_geometry(ls, Phase::Solid);
  std::vector<double> v(g.grid.cell_count(), std::nan(""));
  for (std::size_t c : g.interfacial_cells()) v[c] = 1.0 + 0.3 * g.centroid[c].x;
  for (auto _ : state) benchmark::DoNotOptimize(extend_velocity(ls, v, g));
}
BENCHMARK(BM_ExtendVelocity)->RangeMultiplier(2)->Range(64, 256);

static void BM_DiffuseImplicit(benchmark::State& state) {
  const LevelSet ls = flower(static_cast<int>(state.range(0)));
  const CutGeometry g = compute_geometry(ls, Phase::Liquid);
  PhaseProblem p{g, ScalarField(g.grid, -0.5), 1.0, std::vector<double>(g.grid.cell_count(), 0.0)};
  p.field.apply_bc();
  const double dt = 0.5 * g.grid.dx();
  for (auto _ : state) benchmark::DoNotOptimize(diffuse_implicit(p, dt));
}
BENCHMARK(BM_DiffuseImplicit)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
