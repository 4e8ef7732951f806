#include <benchmark/benchmark.h>

#include "facialpulse/calibration.hpp"
#include "facialpulse/random.hpp"
#include "facialpulse/synth.hpp"

namespace fp = facialpulse;

namespace {

struct Bench {
  fp::LandmarkSequence truth;
  fp::LandmarkSequence detections;
  std::vector<fp::GrayFrame> frames;
};

Bench make_bench(int num_frames, std::uint64_t seed) {
  auto cfg = fp::calibration_bench_config(seed);
  cfg.num_frames = num_frames;
  Bench b;
  b.truth = fp::gen_trajectory(cfg);
  b.detections = fp::add_detection_noise(b.truth, cfg).frames;
  fp::RenderConfig render;
  render.texture_seed = fp::derive_seed(seed, {21});
  b.frames = fp::render_frames(b.truth, render);
  return b;
}

double mean_error(const fp::LandmarkSequence& a, const fp::LandmarkSequence& b) {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t j = 0; j < a[t].points.size(); ++j, ++n) total += (a[t].points[j] - b[t].points[j]).norm();
  return total / static_cast<double>(n);
}

void BM_CalibrateSequence(benchmark::State& state) {
  const auto b = make_bench(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fp::calibrate_sequence(b.frames, b.detections, {}, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CalibrateSequence)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

// Sensitivity of the calibrated error to the process and measurement noise
// (arguments are q and r in hundredths of px^2). Reported as counters.
void BM_KalmanSensitivity(benchmark::State& state) {
  const auto b = make_bench(60, 2);
  fp::KalmanConfig kc;
  kc.process_noise_q = static_cast<double>(state.range(0)) / 100.0;
  kc.measurement_noise_r = static_cast<double>(state.range(1)) / 100.0;
  double calibrated = 0.0;
  for (auto _ : state) {
    const auto r = fp::calibrate_sequence(b.frames, b.detections, {}, kc);
    calibrated = mean_error(r.calibrated, b.truth);
  }
  const double raw = mean_error(b.detections, b.truth);
  state.counters["raw_px"] = raw;
  state.counters["calibrated_px"] = calibrated;
  state.counters["improvement"] = 1.0 - calibrated / raw;
}
BENCHMARK(BM_KalmanSensitivity)
    ->ArgsProduct({{5, 25, 100, 400}, {25, 100, 400}})
    ->Iterations(1)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
