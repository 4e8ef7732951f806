#include <benchmark/benchmark.h>

#include "facialpulse/flow.hpp"
#include "facialpulse/synth.hpp"

namespace fp = facialpulse;

namespace {

struct FacePair {
  std::vector<fp::Point2> points;
  fp::GrayFrame prev;
  fp::GrayFrame next;
};

FacePair make_pair() {
  fp::TrajectoryConfig cfg;
  cfg.num_frames = 2;
  cfg.motion_amplitude = 10.0;
  cfg.motion_smoothness = 0.5;
  const auto truth = fp::gen_trajectory(cfg);
  const auto frames = fp::render_frames(truth, {});
  return {truth[0].points, frames[0], frames[1]};
}

void BM_Pyramid(benchmark::State& state) {
  const auto pair = make_pair();
  const fp::FlowConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fp::build_pyramid(pair.prev, cfg.pyramid()));
}
BENCHMARK(BM_Pyramid)->Unit(benchmark::kMillisecond);

// 68 single-level LK solves on one 256x256 pair.
void BM_LkFace(benchmark::State& state) {
  const auto pair = make_pair();
  fp::FlowConfig cfg;
  cfg.num_levels = 1;
  const auto grad = fp::spatial_gradients(pair.prev);
  for (auto _ : state) {
    for (const auto& p : pair.points) benchmark::DoNotOptimize(fp::try_lk_point_flow(pair.prev, grad, pair.next, p, {}, cfg));
  }
}
BENCHMARK(BM_LkFace)->Unit(benchmark::kMillisecond);

void BM_ForwardBackwardFace(benchmark::State& state) {
  const auto pair = make_pair();
  fp::FlowConfig cfg;
  cfg.num_levels = static_cast<int>(state.range(0));
  const auto a = fp::build_pyramid(pair.prev, cfg.pyramid());
  const auto b = fp::build_pyramid(pair.next, cfg.pyramid());
  for (auto _ : state) {
    for (const auto& p : pair.points) benchmark::DoNotOptimize(fp::forward_backward_check(a, b, p, cfg));
  }
}
BENCHMARK(BM_ForwardBackwardFace)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
