#include <benchmark/benchmark.h>

#include "parax/elliptic.hpp"
#include "parax/hierarchy.hpp"
#include "parax/operators.hpp"
#include "parax/pic.hpp"
#include "parax/verify.hpp"

using namespace parax;

namespace {

grid::MeshPtr cube(int n) { return grid::build_mesh(1.0, 1.0, 1.0, n + 1, n + 1, n / 2 + 1); }

/// Gaussian beam on a cube with n intervals per transverse axis.
pic::ParticleEnsemble beam(const grid::MeshPtr& m, std::size_t count) {
  pic::SamplingConfig s;
  s.family = pic::Family::gaussian;
  s.count = count;
  s.rx = s.ry = 0.1;
  s.v_sigma_perp = 0.05;
  s.v_mean = {0.0, 0.0, 0.1};
  return pic::sample_initial_distribution(s, *m);
}

void BM_Laplacian(benchmark::State& st) {
  const auto m = cube(static_cast<int>(st.range(0)));
  const grid::ScalarField f(m, [](double x, double y, double z) { return x * y + z * z; });
  for (auto _ : st) benchmark::DoNotOptimize(grid::laplace_perp(f));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(m->size()));
}
BENCHMARK(BM_Laplacian)->Arg(32)->Arg(64);

void BM_Deposit(benchmark::State& st) {
  const auto m = cube(32);
  const auto p = beam(m, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(pic::deposit_sources(p, m));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Deposit)->Arg(10000)->Arg(100000);

void BM_PoissonSlice(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(verify::mms_error("poisson-2d", n));
}
BENCHMARK(BM_PoissonSlice)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Hierarchy(benchmark::State& st) {
  const auto m = cube(static_cast<int>(st.range(0)));
  const hierarchy::Solvers solvers(m, 0.5);
  const auto src = verify::quasi_static_sources(m, 0.5, 0.1, 0.1);
  hierarchy::FieldHistory hist;
  hist.push(hierarchy::solve_hierarchy(1, {verify::quasi_static_sources(m, 0.5, 0.0, 0.1)}, hist, 0.0, 0.5, 0.1,
                                       {}, {}, &solvers));
  for (auto _ : st)
    benchmark::DoNotOptimize(hierarchy::solve_hierarchy(1, {src}, hist, 0.1, 0.5, 0.1, {}, {}, &solvers));
}
BENCHMARK(BM_Hierarchy)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Push(benchmark::State& st) {
  const auto m = cube(32);
  auto h = hierarchy::solve_hierarchy(1, {verify::quasi_static_sources(m, 0.5, 0.0, 0.1)},
                                      hierarchy::FieldHistory{}, 0.0, 0.5, 0.1, {});
  auto p = beam(m, static_cast<std::size_t>(st.range(0)));
  const auto force = pic::hierarchy_force(h, 1);
  for (auto _ : st) {
    auto q = p;
    pic::push_particles(q, force, *m, 1e-3);
    benchmark::DoNotOptimize(q.x.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Push)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
