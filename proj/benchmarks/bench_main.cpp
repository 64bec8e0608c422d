#include <benchmark/benchmark.h>

#include <vector>

#include "aht/catalog.hpp"
#include "aht/diagnostics.hpp"
#include "aht/flow.hpp"
#include "aht/geometry.hpp"
#include "aht/jet.hpp"

using namespace aht;

namespace {

// Product of two dense jets in `dim` variables truncated at `degree`.
void BM_JetMultiply(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int degree = static_cast<int>(state.range(1));
  Jet a = Jet::variable(0, 0.3, dim, degree), b = Jet::variable(dim - 1, -0.2, dim, degree);
  for (int i = 0; i < dim; ++i) {
    a = a * Jet::variable(i, 1.0 + 0.1 * i, dim, degree);
    b = b + exp(Jet::variable(i, 0.05 * i, dim, degree));
  }
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_JetMultiply)->Args({4, 3})->Args({4, 4})->Args({6, 3})->Args({6, 4});

void BM_CurvatureS6(benchmark::State& state) {
  const auto s = s6_nearly_kahler().build();
  const std::vector<double> p{0.1, -0.2, 0.3, 0.05, 0.2, -0.1};
  const bool with_derivative = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(curvature(s.metric, p, with_derivative ? 3 : 2, with_derivative));
}
BENCHMARK(BM_CurvatureS6)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AnalyzePoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = conformal(n, "sin(x1)*cos(x2)", true);
  const auto s = spec.build();
  const auto p = sample_points(spec, 1, 1).front();
  for (auto _ : state) benchmark::DoNotOptimize(section_residuals(analyze_point(s, p)));
}
BENCHMARK(BM_AnalyzePoint)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_FlowGradient(benchmark::State& state) {
  const JGrid g = JGrid::sample(random_structure(7, 2, 0.3), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gradient(g));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.nodes()));
}
BENCHMARK(BM_FlowGradient)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

// One accepted descent step including line search and re-projection.
void BM_FlowIteration(benchmark::State& state) {
  const JGrid start = JGrid::sample(random_structure(7, 2, 0.3), static_cast<int>(state.range(0)));
  FlowOptions opts;
  opts.max_iter = 1;
  for (auto _ : state) benchmark::DoNotOptimize(descend(start, opts));
}
BENCHMARK(BM_FlowIteration)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
