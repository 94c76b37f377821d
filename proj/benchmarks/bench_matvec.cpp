#include <benchmark/benchmark.h>

#include <random>

#include "harmrec/bccb.hpp"
#include "harmrec/dictionary.hpp"
#include "harmrec/solvers.hpp"

namespace {

using namespace harmrec;

constexpr Index kL2 = 32;

const ArrayGeometry& reference_geometry() {
  static const ArrayGeometry g = subsample_preserving_aperture(make_ura(51, 16), 40, 1);
  return g;
}

ComplexVector random_vector(Index n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  ComplexVector v(n);
  for (Index k = 0; k < n; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(k) = Complex(re, im);
  }
  return v;
}

void BM_DenseGramMatvec(benchmark::State& state) {
  const Index l1 = state.range(0);
  const auto dict = build_subsampled_dictionary(reference_geometry(), make_uniform_grid(l1), make_uniform_grid(kL2));
  const auto gram = dense_gram(dict);
  const ComplexVector x = random_vector(l1 * kL2);
  ComplexVector y(l1 * kL2);
  for (auto _ : state) {
    y.noalias() = gram.entries * x;
    benchmark::DoNotOptimize(y.data());
  }
  state.SetComplexityN(l1 * kL2);
}
BENCHMARK(BM_DenseGramMatvec)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);

void BM_FastGramMatvec(benchmark::State& state) {
  const Index l1 = state.range(0);
  const auto op = gram_operator(reference_geometry(), l1, kL2);
  auto ws = op.make_workspace();
  const ComplexVector x = random_vector(op.size());
  ComplexVector y(op.size());
  for (auto _ : state) {
    op.apply(x, y, ws);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetComplexityN(op.size());
}
BENCHMARK(BM_FastGramMatvec)->RangeMultiplier(2)->Range(16, 512)->Unit(benchmark::kMicrosecond);

void BM_GramOperatorSetup(benchmark::State& state) {
  const Index l1 = state.range(0);
  for (auto _ : state) {
    auto op = gram_operator(reference_geometry(), l1, kL2);
    benchmark::DoNotOptimize(op.eigenvalues().data());
  }
}
BENCHMARK(BM_GramOperatorSetup)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_FistaIteration(benchmark::State& state) {
  const Index l1 = state.range(0);
  const auto backend = state.range(1) == 0 ? Backend::regular : Backend::fast;
  const auto dict = build_subsampled_dictionary(reference_geometry(), make_uniform_grid(l1), make_uniform_grid(kL2));
  const ComplexVector y = random_vector(reference_geometry().element_count());
  const auto problem = make_lasso_problem(dict, y, 1.0, backend);
  SolverConfig config;
  config.backend = backend;
  config.iterations = 20;
  config.record_objective = false;
  config.step_size = 1.0 / (40.0 * double(l1 * kL2));
  double seconds = 0.0;
  for (auto _ : state) {
    const auto result = fista_solve(problem, config);
    seconds += result.per_iteration_seconds;
    benchmark::DoNotOptimize(result.estimate.data());
  }
  state.counters["per_iteration_us"] =
      benchmark::Counter(seconds * 1e6 / double(state.iterations()), benchmark::Counter::kDefaults);
  state.SetLabel(std::string(to_string(backend)));
}
BENCHMARK(BM_FistaIteration)
    ->ArgsProduct({{16, 32, 64}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
