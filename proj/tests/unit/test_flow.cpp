#include <gtest/gtest.h>

#include <random>

#include "facialpulse/error.hpp"
#include "facialpulse/flow.hpp"
#include "scenes.hpp"

namespace fp = facialpulse;

namespace {

fp::GrayFrame constant_frame(int w, int h, double value) {
  return fp::GrayFrame(w, h, std::vector<double>(static_cast<std::size_t>(w * h), value));
}

fp::GrayFrame blob_at(const fp::Point2& p, int size = 64, double texture = 0.0, std::uint64_t seed = 1) {
  return scenes::render({p}, size, size, seed, texture);
}

}  // namespace

TEST(FlowConfig, Validation) {
  fp::FlowConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.window_n = 14;
  EXPECT_THROW(cfg.validate(), fp::Error);
  cfg = {};
  cfg.fb_threshold_tau = 0.0;
  EXPECT_THROW(cfg.validate(), fp::Error);
  cfg = {};
  cfg.min_eigen = -1.0;
  EXPECT_THROW(cfg.validate(), fp::Error);
}

TEST(LkPointFlow, IdenticalFramesGiveZero) {
  const auto f = blob_at({32, 32}, 64, 10.0);
  const auto flow = fp::lk_point_flow(f, f, {32, 32}, {}, fp::FlowConfig{});
  EXPECT_NEAR(flow.u, 0.0, 1e-9);
  EXPECT_NEAR(flow.v, 0.0, 1e-9);
}

TEST(LkPointFlow, RecoversSubpixelBlobShift) {
  const auto prev = blob_at({32, 32});
  const auto next = blob_at({33.5, 31.25});
  const auto flow = fp::lk_point_flow(prev, next, {32, 32}, {}, fp::FlowConfig{});
  EXPECT_NEAR(flow.u, 1.5, 0.1);
  EXPECT_NEAR(flow.v, -0.75, 0.1);
}

TEST(LkPointFlow, ConstantFramesAreSingular) {
  const auto f = constant_frame(32, 32, 50.0);
  try {
    fp::lk_point_flow(f, f, {16, 16}, {}, fp::FlowConfig{});
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_EQ(e.code(), fp::ErrorCode::kSingularSystem);
  }
}

TEST(LkPointFlow, OutsideFrameRejected) {
  const auto f = blob_at({32, 32});
  EXPECT_THROW(fp::lk_point_flow(f, f, {-3, 10}, {}, fp::FlowConfig{}), fp::Error);
}

TEST(LkPointFlow, NormalMatrixIsSymmetricPsd) {
  const auto prev = blob_at({30.3, 33.1}, 64, 10.0);
  const auto next = blob_at({31.0, 32.4}, 64, 10.0);
  const auto grad = fp::spatial_gradients(prev);
  fp::LkTrace trace;
  ASSERT_TRUE(fp::try_lk_point_flow(prev, grad, next, {30, 33}, {}, fp::FlowConfig{}, &trace));
  EXPECT_GE(trace.normal.min_eigenvalue(), 0.0);
  EXPECT_LE(trace.normal.min_eigenvalue(), trace.normal.max_eigenvalue());
  EXPECT_GE(trace.normal.sxx * trace.normal.syy - trace.normal.sxy * trace.normal.sxy, 0.0);
  EXPECT_GE(trace.iterations, 1);
}

// Eq. 5 residual over the window is smaller at the converged flow than at zero.
TEST(LkPointFlow, BrightnessResidualDecreases) {
  for (int trial = 0; trial < 10; ++trial) {
    std::mt19937_64 rng(trial);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const fp::Point2 p{32 + u(rng) * 0.3, 32 + u(rng) * 0.3};
    const fp::Point2 shift{u(rng), u(rng)};
    const auto prev = blob_at(p, 64, 10.0, trial);
    const auto next = blob_at(p + shift, 64, 10.0, trial);
    const auto grad = fp::spatial_gradients(prev);
    fp::LkTrace trace;
    const auto flow = fp::try_lk_point_flow(prev, grad, next, {32, 32}, {}, fp::FlowConfig{}, &trace);
    ASSERT_TRUE(flow);
    if (!trace.converged) continue;
    auto residual = [&](double fu, double fv) {
      double total = 0.0;
      for (int dy = -7; dy <= 7; ++dy) {
        for (int dx = -7; dx <= 7; ++dx) {
          const double x = 32 + dx, y = 32 + dy;
          const double it = fp::sample_bilinear(next, x + fu, y + fv) - prev.at(32 + dx, 32 + dy);
          total += std::abs(it);
        }
      }
      return total;
    };
    EXPECT_LT(residual(flow->u, flow->v), residual(0, 0)) << "trial " << trial;
  }
}

TEST(PyramidalFlow, IdenticalPyramidsGiveZero) {
  const auto f = blob_at({32, 32}, 64, 10.0);
  const auto pyr = fp::build_pyramid(f, fp::FlowConfig{}.pyramid());
  const auto flow = fp::pyramidal_flow(pyr, pyr, {32, 32}, fp::FlowConfig{});
  EXPECT_NEAR(flow.u, 0.0, 1e-9);
  EXPECT_NEAR(flow.v, 0.0, 1e-9);
}

TEST(PyramidalFlow, SingleLevelMatchesLkBitForBit) {
  fp::FlowConfig cfg;
  cfg.num_levels = 1;
  const auto prev = blob_at({31.2, 32.7}, 64, 10.0);
  const auto next = blob_at({32.1, 31.9}, 64, 10.0);
  const auto a = fp::pyramidal_flow(fp::build_pyramid(prev, cfg.pyramid()), fp::build_pyramid(next, cfg.pyramid()),
                                    {31, 33}, cfg);
  const auto b = fp::lk_point_flow(prev, next, {31, 33}, {}, cfg);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.v, b.v);
}

// Face layout so neighbouring blobs can capture a single-level solve.
TEST(PyramidalFlow, LargeShiftNeedsPyramid) {
  const auto pts = scenes::face_layout();
  const fp::Point2 shift{8, 0};
  const auto prev = scenes::render(pts, 256, 256, 1);
  const auto next = scenes::render(scenes::shifted(pts, shift), 256, 256, 1);
  fp::FlowConfig pyr_cfg;
  fp::FlowConfig flat_cfg;
  flat_cfg.num_levels = 1;
  const auto pa = fp::build_pyramid(prev, pyr_cfg.pyramid()), pb = fp::build_pyramid(next, pyr_cfg.pyramid());
  const auto fa = fp::build_pyramid(prev, flat_cfg.pyramid()), fb = fp::build_pyramid(next, flat_cfg.pyramid());
  double flat_mean = 0.0;
  for (const auto& p : pts) {
    const auto pyr = fp::pyramidal_flow(pa, pb, p, pyr_cfg);
    EXPECT_LE((pyr.as_vector() - shift).norm(), 0.5);
    const auto flat = fp::try_pyramidal_flow(fa, fb, p, flat_cfg);
    flat_mean += (flat ? (flat->as_vector() - shift).norm() : shift.norm()) / static_cast<double>(pts.size());
  }
  EXPECT_GT(flat_mean, 2.0);
}

TEST(PyramidalFlow, SmallShiftAgreesWithSingleLevel) {
  const auto prev = blob_at({32, 32}, 64, 10.0);
  const auto next = blob_at({32.5, 32.5}, 64, 10.0);
  fp::FlowConfig flat;
  flat.num_levels = 1;
  const fp::FlowConfig pyr;
  const auto a = fp::pyramidal_flow(fp::build_pyramid(prev, pyr.pyramid()), fp::build_pyramid(next, pyr.pyramid()),
                                    {32, 32}, pyr);
  const auto b = fp::lk_point_flow(prev, next, {32, 32}, {}, flat);
  EXPECT_NEAR(a.u, b.u, 0.05);
  EXPECT_NEAR(a.v, b.v, 0.05);
  EXPECT_NEAR(a.u, 0.5, 0.1);
  EXPECT_NEAR(a.v, 0.5, 0.1);
}

TEST(PyramidalFlow, AllLevelsSingularThrows) {
  const auto f = constant_frame(64, 64, 80.0);
  const auto pyr = fp::build_pyramid(f, fp::FlowConfig{}.pyramid());
  EXPECT_FALSE(fp::try_pyramidal_flow(pyr, pyr, {32, 32}, fp::FlowConfig{}).has_value());
  EXPECT_THROW(fp::pyramidal_flow(pyr, pyr, {32, 32}, fp::FlowConfig{}), fp::Error);
}

TEST(ForwardBackward, IdenticalFramesValid) {
  const auto f = blob_at({32, 32}, 64, 10.0);
  const auto pyr = fp::build_pyramid(f, fp::FlowConfig{}.pyramid());
  const auto r = fp::forward_backward_check(pyr, pyr, {32, 32}, fp::FlowConfig{});
  EXPECT_TRUE(r.valid);
  EXPECT_NEAR(r.fb_error, 0.0, 1e-9);
}

TEST(ForwardBackward, CleanShiftIsValidAndAccurate) {
  const fp::FlowConfig cfg;
  const auto prev = fp::build_pyramid(blob_at({30, 32}, 64, 10.0), cfg.pyramid());
  const auto next = fp::build_pyramid(blob_at({32, 32}, 64, 10.0), cfg.pyramid());
  const auto r = fp::forward_backward_check(prev, next, {30, 32}, cfg);
  EXPECT_TRUE(r.valid);
  EXPECT_NEAR(r.flow.u, 2.0, 0.1);
  EXPECT_NEAR(r.flow.v, 0.0, 0.1);
}

TEST(ForwardBackward, SingularIsInvalidNotThrown) {
  const auto f = constant_frame(64, 64, 80.0);
  const auto pyr = fp::build_pyramid(f, fp::FlowConfig{}.pyramid());
  const auto r = fp::forward_backward_check(pyr, pyr, {32, 32}, fp::FlowConfig{});
  EXPECT_FALSE(r.valid);
  EXPECT_TRUE(std::isinf(r.fb_error));
}

TEST(ForwardBackward, ValidIffErrorWithinTau) {
  const auto prev = fp::build_pyramid(blob_at({30, 32}, 64, 10.0), fp::FlowConfig{}.pyramid());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto next = fp::build_pyramid(scenes::uniform_noise(64, 64, seed), fp::FlowConfig{}.pyramid());
    for (double tau : {0.1, 1.0, 5.0}) {
      fp::FlowConfig cfg;
      cfg.fb_threshold_tau = tau;
      const auto r = fp::forward_backward_check(prev, next, {30, 32}, cfg);
      EXPECT_EQ(r.valid, r.fb_error <= tau);
    }
  }
}

// Forward flow is close to minus the backward flow for small clean shifts.
TEST(ForwardBackward, TimeReversalAntisymmetry) {
  const fp::FlowConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    std::mt19937_64 rng(100 + trial);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    const fp::Point2 shift{u(rng), u(rng)};
    const auto a = fp::build_pyramid(blob_at({32, 32}, 64, 10.0, trial), cfg.pyramid());
    const auto b = fp::build_pyramid(blob_at(fp::Point2{32, 32} + shift, 64, 10.0, trial), cfg.pyramid());
    const auto fwd = fp::pyramidal_flow(a, b, {32, 32}, cfg);
    const auto bwd = fp::pyramidal_flow(b, a, fp::Point2{32, 32} + fwd.as_vector(), cfg);
    EXPECT_NEAR(fwd.u, -bwd.u, 0.1);
    EXPECT_NEAR(fwd.v, -bwd.v, 0.1);
  }
}
