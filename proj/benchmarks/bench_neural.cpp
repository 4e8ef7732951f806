#include <benchmark/benchmark.h>

#include <random>

#include "facialpulse/neural.hpp"

namespace fp = facialpulse;

namespace {

Eigen::MatrixXd random_sequence(Eigen::Index t, Eigen::Index d) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd s(t, d);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = g(rng);
  return s;
}

void BM_BiGruForward(benchmark::State& state) {
  const auto model = fp::init_bigru(136, 64, 1);
  const auto seq = random_sequence(state.range(0), 136);
  for (auto _ : state) benchmark::DoNotOptimize(fp::bigru_predict(model, seq));
}
BENCHMARK(BM_BiGruForward)->Arg(32)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_BiGruForwardBackward(benchmark::State& state) {
  const auto model = fp::init_bigru(136, 64, 1);
  const auto seq = random_sequence(state.range(0), 136);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto fwd = fp::bigru_forward(model, seq, true, ++seed);
    benchmark::DoNotOptimize(fp::backward(model, fwd.cache, 1.0));
  }
}
BENCHMARK(BM_BiGruForwardBackward)->Arg(32)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_AdamStep(benchmark::State& state) {
  auto model = fp::init_bigru(136, 64, 1);
  auto opt = fp::AdamState::for_weights(model.weights);
  auto grads = model.weights;
  for (auto _ : state) fp::adam_step(model.weights, grads, opt);
}
BENCHMARK(BM_AdamStep);

}  // namespace

BENCHMARK_MAIN();
