#include <benchmark/benchmark.h>

#include "logsymp/cohomology.hpp"
#include "logsymp/deformations.hpp"
#include "logsymp/locus.hpp"
#include "logsymp/moser.hpp"

using namespace logsymp;

namespace {

void BM_ExteriorDerivativeOnGrid(benchmark::State& state) {
  const auto spec = catalog_lookup(state.range(0) ? "s2xt2" : "s2");
  const BForm omega = LogSymplecticStructure::catalog(spec).omega;
  const BForm a = interior(BMultiVector::basis(spec.dim, {1}), omega);
  const auto grid = chart_grid(spec, {17, 8});
  for (auto _ : state) benchmark::DoNotOptimize(sup_norm(exterior_derivative(a, spec), grid));
}
BENCHMARK(BM_ExteriorDerivativeOnGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SchoutenResidual(benchmark::State& state) {
  const auto spec = catalog_lookup("s2xt2");
  const BMultiVector pi = deform(LogSymplecticStructure::catalog(spec), varpi(spec, {0.1, 0.2}),
                                 gamma(spec, {0.05, 0.01, -0.02}))
                              .pi;
  for (auto _ : state) benchmark::DoNotOptimize(schouten_jacobi_residual(pi, spec));
}
BENCHMARK(BM_SchoutenResidual)->Unit(benchmark::kMillisecond);

void BM_RegularizedVolume(benchmark::State& state) {
  const auto s2 = catalog_lookup("s2");
  const BForm mu = BForm::basis(2, {0, 1}, ScalarField::from_expr(Expr::parse("1 + 0.3*z", {"z", "th"})));
  for (auto _ : state) benchmark::DoNotOptimize(regularized_volume(mu, s2).volume);
}
BENCHMARK(BM_RegularizedVolume)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
  const auto spec = catalog_lookup("s2");
  const auto base = LogSymplecticStructure::catalog(spec);
  const BForm omega = omega_family(base, {{0.1}, {0.05}});
  for (auto _ : state) benchmark::DoNotOptimize(classify(omega, base));
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMillisecond);

void BM_MoserFlow(benchmark::State& state) {
  const MoserProblem p = golden_problem(catalog_lookup("s2"));
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_flow(p, steps, {33, 32}).seed_count());
  state.SetComplexityN(steps);
}
BENCHMARK(BM_MoserFlow)->Arg(25)->Arg(50)->Arg(100)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

void BM_NormalizeShiftedLocus(benchmark::State& state) {
  const auto s2 = catalog_lookup("s2");
  const auto base = LogSymplecticStructure::catalog(s2);
  const BMultiVector w = BMultiVector::basis(
      2, {0, 1}, ScalarField::from_expr(Expr::parse("-(z - 0.05*sin(th))", {"z", "th"})), Frame::Coordinate);
  for (auto _ : state) benchmark::DoNotOptimize(normalize(w, base).back().route_gap);
}
BENCHMARK(BM_NormalizeShiftedLocus)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
