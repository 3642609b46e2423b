// Microbenchmarks for the hot paths: gradient evaluation, band features,
// least squares, and the minimax fitter.

#include <benchmark/benchmark.h>

#include "relureg/dataset.hpp"
#include "relureg/numerics.hpp"
#include "relureg/poly_approx.hpp"
#include "relureg/ptas.hpp"
#include "relureg/rng.hpp"
#include "relureg/surrogate.hpp"

namespace {

using namespace relureg;

Dataset make_dataset(int d, Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed);
  Vec w_star = gaussian_vec(d, rng);
  w_star.normalize();
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, d};
  LabelModel labels;  // clean
  auto [ds, gt] = generate(marginal, labels, w_star, m, rng);
  return std::move(ds);
}

void BM_SurrogateGradient(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Dataset ds = make_dataset(d, 100000, 7);
  Rng rng(3);
  const LinearModel model{gaussian_vec(d, rng), Activation::relu()};
  for (auto _ : state) {
    Vec g = surrogate_gradient(model, ds);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * ds.size());
}
BENCHMARK(BM_SurrogateGradient)->Arg(5)->Arg(20)->Arg(100);

void BM_MonomialFeatures(benchmark::State& state) {
  const int d = 3;
  const int k = static_cast<int>(state.range(0));
  Rng rng(11);
  const Vec x = gaussian_vec(d, rng);
  for (auto _ : state) {
    Vec f = monomial_features(x, k);
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_MonomialFeatures)->Arg(4)->Arg(8)->Arg(12);

void BM_LeastSquares(benchmark::State& state) {
  const Eigen::Index m = state.range(0);
  const int n = 30;
  Rng rng(5);
  Mat A(m, n);
  Vec b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A.row(i) = gaussian_vec(n, rng).transpose();
    b[i] = rng.normal();
  }
  for (auto _ : state) {
    Vec c = least_squares(A, b);
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(BM_LeastSquares)->Arg(1000)->Arg(10000);

void BM_RemezRelu(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto res = remez_relu_approx(n, 1.0, 50);
    benchmark::DoNotOptimize(res.second);
  }
}
BENCHMARK(BM_RemezRelu)->Arg(8)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
