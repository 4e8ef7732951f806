#include <gtest/gtest.h>

#include <cmath>

#include "facialpulse/error.hpp"
#include "facialpulse/features.hpp"
#include "facialpulse/synth.hpp"

namespace fp = facialpulse;

namespace {

double mean_step(const fp::LandmarkSequence& seq) {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    for (std::size_t j = 0; j < seq[t].points.size(); ++j) {
      total += (seq[t].points[j] - seq[t - 1].points[j]).norm();
      ++n;
    }
  }
  return total / static_cast<double>(n);
}

fp::TrajectoryConfig small_config() {
  fp::TrajectoryConfig cfg;
  cfg.num_frames = 40;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(TrajectoryConfig, Validation) {
  auto cfg = small_config();
  EXPECT_NO_THROW(cfg.validate());
  cfg.num_frames = 1;
  EXPECT_THROW(cfg.validate(), fp::Error);
  cfg = small_config();
  cfg.motion_smoothness = 0.0;
  EXPECT_THROW(cfg.validate(), fp::Error);
  cfg = small_config();
  cfg.outlier_rate = 1.5;
  EXPECT_THROW(cfg.validate(), fp::Error);
  cfg = small_config();
  cfg.jitter_sigma = -1;
  EXPECT_THROW(cfg.validate(), fp::Error);
}

TEST(GenTrajectory, ZeroAmplitudeIsBaseLayout) {
  auto cfg = small_config();
  cfg.motion_amplitude = 0.0;
  const auto seq = fp::gen_trajectory(cfg);
  const auto base = fp::base_layout(cfg);
  ASSERT_EQ(seq.size(), 40u);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    EXPECT_EQ(seq[t].frame_index, static_cast<int>(t));
    EXPECT_EQ(seq[t].points, base);
  }
}

TEST(GenTrajectory, DeterministicInSeed) {
  const auto a = fp::gen_trajectory(small_config());
  const auto b = fp::gen_trajectory(small_config());
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(a[t].points, b[t].points);
  auto other = small_config();
  other.seed = 6;
  EXPECT_NE(fp::gen_trajectory(other)[3].points, a[3].points);
}

TEST(GenTrajectory, SmootherMovesLess) {
  auto rough = small_config();
  rough.motion_smoothness = 0.1;
  for (double s : {0.5, 0.9, 0.99}) {
    auto smooth = small_config();
    smooth.motion_smoothness = s;
    EXPECT_LT(mean_step(fp::gen_trajectory(smooth)), mean_step(fp::gen_trajectory(rough))) << s;
  }
}

TEST(GenTrajectory, BaseLayoutIsCenteredTemplate) {
  auto cfg = small_config();
  cfg.width = 300;
  cfg.height = 200;
  const auto base = fp::base_layout(cfg);
  const auto& t = fp::AlignmentTemplate::standard68().canonical_points;
  EXPECT_NEAR(base[0].x(), 50 + 200 * t[0].x(), 1e-12);
  EXPECT_NEAR(base[0].y(), 200 * t[0].y(), 1e-12);
  cfg.num_landmarks = 5;
  EXPECT_EQ(fp::base_layout(cfg).size(), 5u);
}

TEST(DetectionNoise, NoNoiseIsIdentity) {
  auto cfg = small_config();
  cfg.jitter_sigma = 0.0;
  cfg.outlier_rate = 0.0;
  const auto truth = fp::gen_trajectory(cfg);
  const auto noisy = fp::add_detection_noise(truth, cfg);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    EXPECT_EQ(noisy.frames[t].points, truth[t].points);
    EXPECT_EQ(noisy.frames[t].frame_index, truth[t].frame_index);
  }
}

TEST(DetectionNoise, AllOutliersAtExactMagnitude) {
  auto cfg = small_config();
  cfg.outlier_rate = 1.0;
  const auto truth = fp::gen_trajectory(cfg);
  const auto noisy = fp::add_detection_noise(truth, cfg);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t j = 0; j < truth[t].points.size(); ++j) {
      EXPECT_TRUE(noisy.outliers[t][j]);
      EXPECT_NEAR((noisy.frames[t].points[j] - truth[t].points[j]).norm(), 10.0, 1e-9);
    }
  }
}

TEST(DetectionNoise, JitterStatistics) {
  auto cfg = small_config();
  cfg.num_frames = 100;
  cfg.outlier_rate = 0.0;
  cfg.jitter_sigma = 2.0;
  const auto truth = fp::gen_trajectory(cfg);
  const auto noisy = fp::add_detection_noise(truth, cfg);
  double sx = 0, sy = 0, mx = 0, my = 0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t j = 0; j < 68; ++j) {
      const auto d = noisy.frames[t].points[j] - truth[t].points[j];
      mx += d.x();
      my += d.y();
      sx += d.x() * d.x();
      sy += d.y() * d.y();
      ++n;
    }
  }
  mx /= n;
  my /= n;
  EXPECT_NEAR(std::sqrt(sx / n - mx * mx), 2.0, 0.2);
  EXPECT_NEAR(std::sqrt(sy / n - my * my), 2.0, 0.2);
}

TEST(DetectionNoise, OutlierBookkeepingIsExact) {
  auto cfg = small_config();
  cfg.num_frames = 100;
  cfg.jitter_sigma = 0.5;
  cfg.outlier_rate = 0.1;
  const auto truth = fp::gen_trajectory(cfg);
  const auto noisy = fp::add_detection_noise(truth, cfg);
  std::size_t count = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t j = 0; j < 68; ++j) {
      const double d = (noisy.frames[t].points[j] - truth[t].points[j]).norm();
      EXPECT_EQ(noisy.outliers[t][j], d >= cfg.outlier_magnitude - 3 * cfg.jitter_sigma);
      count += noisy.outliers[t][j];
    }
  }
  EXPECT_NEAR(static_cast<double>(count) / 6800.0, 0.1, 0.02);
}

TEST(Render, StaticTrajectoryGivesIdenticalFrames) {
  auto cfg = small_config();
  cfg.num_frames = 3;
  cfg.motion_amplitude = 0.0;
  const auto frames = fp::render_frames(fp::gen_trajectory(cfg), {});
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].pixels().values(), frames[2].pixels().values());
  for (double v : frames[0].pixels().values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 255.0);
  }
}

TEST(Render, TranslationShiftsContent) {
  fp::LandmarkSequence seq(2);
  seq[0].points = {{60, 60}, {100, 90}};
  seq[1].frame_index = 1;
  seq[1].points = {{63, 60}, {103, 90}};
  fp::RenderConfig rc;
  rc.width = rc.height = 160;
  rc.texture_amplitude = 0.0;
  const auto f = fp::render_frames(seq, rc);
  for (int dy = -4; dy <= 4; ++dy)
    for (int dx = -4; dx <= 4; ++dx) EXPECT_NEAR(f[0].at(60 + dx, 60 + dy), f[1].at(63 + dx, 60 + dy), 1e-9);
}

TEST(Render, BrightnessConstancyAtBlobCenters) {
  auto cfg = small_config();
  cfg.num_frames = 10;
  const auto truth = fp::gen_trajectory(cfg);
  fp::RenderConfig rc;
  rc.texture_amplitude = 0.0;
  const auto frames = fp::render_frames(truth, rc);
  for (std::size_t t = 1; t < truth.size(); ++t) {
    for (std::size_t j = 0; j < 68; j += 7) {
      const auto& a = truth[0].points[j];
      const auto& b = truth[t].points[j];
      EXPECT_NEAR(fp::sample_bilinear(frames[0], a.x(), a.y()), fp::sample_bilinear(frames[t], b.x(), b.y()), 1.0);
    }
  }
}

TEST(Render, OutOfBoundsNamed) {
  fp::LandmarkSequence seq(1);
  seq[0].points = {{50, 50}, {3, 50}};
  try {
    fp::render_frames(seq, {});
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_EQ(e.code(), fp::ErrorCode::kOutOfBounds);
    EXPECT_NE(std::string(e.what()).find("landmark 1"), std::string::npos);
  }
}

TEST(Texture, BoundedAndSeeded) {
  fp::RenderConfig rc;
  const auto a = fp::texture_field(rc);
  EXPECT_LE(a.values().size(), 256u * 256u);
  for (double v : a.values()) EXPECT_LE(std::abs(v), 10.0 + 1e-12);
  EXPECT_EQ(fp::texture_field(rc).values(), a.values());
  rc.texture_seed = 1;
  EXPECT_NE(fp::texture_field(rc).values(), a.values());
}

TEST(RegressionDataset, LabelsFollowSmoothness) {
  EXPECT_DOUBLE_EQ(fp::smoothness_to_label(0.1), 0.0);
  EXPECT_DOUBLE_EQ(fp::smoothness_to_label(1.0), 63.0);
  EXPECT_DOUBLE_EQ(fp::smoothness_to_label(0.55), 31.5);
  EXPECT_NE(fp::sample_seed(1, 0), fp::sample_seed(1, 1));
}

TEST(RegressionDataset, DeterministicAndCoversRange) {
  fp::RegressionDatasetConfig cfg;
  cfg.num_frames = 8;
  const auto a = fp::gen_regression_dataset(200, cfg, 3);
  const auto b = fp::gen_regression_dataset(200, cfg, 3);
  ASSERT_EQ(a.size(), 200u);
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_EQ(a[i].noisy_detections[7].points, b[i].noisy_detections[7].points);
    EXPECT_EQ(a[i].ground_truth.size(), a[i].noisy_detections.size());
    EXPECT_DOUBLE_EQ(a[i].label, fp::smoothness_to_label(a[i].smoothness));
    EXPECT_TRUE(a[i].frames.empty());
    lo = std::min(lo, a[i].label);
    hi = std::max(hi, a[i].label);
  }
  EXPECT_GE(hi - lo, 0.8 * 63.0);
  EXPECT_GE(lo, 0.0);
  EXPECT_LE(hi, 63.0);
  EXPECT_THROW(fp::gen_regression_dataset(1, cfg, 3), fp::Error);
}

TEST(RegressionDataset, RenderingProducesFrames) {
  fp::RegressionDatasetConfig cfg;
  cfg.num_frames = 3;
  cfg.render = true;
  const auto a = fp::gen_regression_dataset(2, cfg, 3);
  EXPECT_EQ(a[0].frames.size(), 3u);
  EXPECT_EQ(a[0].frames[0].frame_index(), 0);
}
