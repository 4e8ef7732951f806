#include "facialpulse/flow.hpp"

#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "facialpulse/error.hpp"

namespace facialpulse {

double FlowVector::norm() const { return std::hypot(u, v); }

void FlowConfig::validate() const {
  if (window_n < 3 || window_n % 2 == 0) {
    fail(ErrorCode::kInvalidArgument, "window_n must be odd and >= 3, got " + std::to_string(window_n));
  }
  if (num_levels < 1) fail(ErrorCode::kInvalidArgument, "num_levels must be >= 1");
  if (!(scale_factor > 0.0 && scale_factor < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "scale_factor must lie in (0, 1)");
  }
  if (max_iterations < 1) fail(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (!(convergence_eps > 0.0) || !(min_eigen > 0.0) || !(fb_threshold_tau > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "flow thresholds must be strictly positive");
  }
}

PyramidConfig FlowConfig::pyramid() const {
  PyramidConfig p;
  p.num_levels = num_levels;
  p.scale_factor = scale_factor;
  return p;
}

double NormalMatrix::min_eigenvalue() const {
  const double half_trace = 0.5 * (sxx + syy);
  const double diff = 0.5 * (sxx - syy);
  return half_trace - std::sqrt(diff * diff + sxy * sxy);
}

double NormalMatrix::max_eigenvalue() const {
  const double half_trace = 0.5 * (sxx + syy);
  const double diff = 0.5 * (sxx - syy);
  return half_trace + std::sqrt(diff * diff + sxy * sxy);
}

namespace {

bool inside(const GrayFrame& frame, const Point2& p) {
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= frame.width() - 1 && p.y() <= frame.height() - 1;
}

}  // namespace

std::optional<FlowVector> try_lk_point_flow(const GrayFrame& prev, const GradientField& prev_grad,
                                            const GrayFrame& next, const Point2& point,
                                            const FlowVector& initial_guess, const FlowConfig& cfg,
                                            LkTrace* trace) {
  if (!prev.pixels().same_shape(next.pixels()) || !prev.pixels().same_shape(prev_grad.ix)) {
    fail(ErrorCode::kDimensionMismatch, "LK frames differ in size");
  }
  const int half = cfg.window_n / 2;
  const std::size_t count = static_cast<std::size_t>(cfg.window_n) * cfg.window_n;

  // Template patch and its gradients are fixed across iterations.
  std::vector<double> templ(count), gx(count), gy(count);
  NormalMatrix normal;
  std::size_t k = 0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx, ++k) {
      const double x = point.x() + dx;
      const double y = point.y() + dy;
      templ[k] = sample_bilinear(prev, x, y);
      gx[k] = sample_bilinear(prev_grad.ix, x, y);
      gy[k] = sample_bilinear(prev_grad.iy, x, y);
      normal.sxx += gx[k] * gx[k];
      normal.sxy += gx[k] * gy[k];
      normal.syy += gy[k] * gy[k];
    }
  }
  const double min_eig = normal.min_eigenvalue();
  // Gram matrix of real vectors: PSD up to rounding.
  assert(min_eig >= -1e-9 * (normal.sxx + normal.syy + 1.0));
  if (trace != nullptr) trace->normal = normal;
  if (min_eig / static_cast<double>(count) < cfg.min_eigen) return std::nullopt;

  const double det = normal.sxx * normal.syy - normal.sxy * normal.sxy;
  double u = initial_guess.u;
  double v = initial_guess.v;
  int iter = 0;
  bool converged = false;
  while (iter < cfg.max_iterations) {
    ++iter;
    double bx = 0.0;
    double by = 0.0;
    k = 0;
    for (int dy = -half; dy <= half; ++dy) {
      for (int dx = -half; dx <= half; ++dx, ++k) {
        const double it = sample_bilinear(next, point.x() + dx + u, point.y() + dy + v) - templ[k];
        bx -= gx[k] * it;
        by -= gy[k] * it;
      }
    }
    const double du = (normal.syy * bx - normal.sxy * by) / det;
    const double dv = (normal.sxx * by - normal.sxy * bx) / det;
    u += du;
    v += dv;
    if (std::hypot(du, dv) < cfg.convergence_eps) {
      converged = true;
      break;
    }
  }
  if (trace != nullptr) {
    trace->iterations = iter;
    trace->converged = converged;
  }
  if (!std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
  return FlowVector{u, v};
}

FlowVector lk_point_flow(const GrayFrame& prev, const GrayFrame& next, const Point2& point,
                         const FlowVector& initial_guess, const FlowConfig& cfg) {
  cfg.validate();
  if (!inside(prev, point)) fail(ErrorCode::kOutOfBounds, "LK point outside frame");
  const GradientField grad = spatial_gradients(prev);
  auto flow = try_lk_point_flow(prev, grad, next, point, initial_guess, cfg);
  if (!flow) fail(ErrorCode::kSingularSystem, "untextured or aperture-limited LK window");
  return *flow;
}

std::optional<FlowVector> try_pyramidal_flow(const ImagePyramid& prev_pyr,
                                             const ImagePyramid& next_pyr, const Point2& point,
                                             const FlowConfig& cfg) {
  if (prev_pyr.num_levels() != next_pyr.num_levels() || prev_pyr.num_levels() < 1 ||
      prev_pyr.scale_factor != next_pyr.scale_factor) {
    fail(ErrorCode::kDimensionMismatch, "pyramids differ in depth or scale");
  }
  const int top = prev_pyr.num_levels() - 1;
  const double s = prev_pyr.scale_factor;
  double level_scale = std::pow(s, top);

  FlowVector guess{0.0, 0.0};
  bool any_solved = false;
  for (int level = top; level >= 0; --level) {
    const Point2 p = point * level_scale;
    const auto lvl = static_cast<std::size_t>(level);
    auto solved = try_lk_point_flow(prev_pyr.levels[lvl], prev_pyr.gradients[lvl],
                                    next_pyr.levels[lvl], p, guess, cfg);
    if (solved) {
      guess = *solved;
      any_solved = true;
    }
    if (level > 0) {
      guess.u /= s;
      guess.v /= s;
      level_scale /= s;
    }
  }
  if (!any_solved) return std::nullopt;
  return guess;
}

FlowVector pyramidal_flow(const ImagePyramid& prev_pyr, const ImagePyramid& next_pyr,
                          const Point2& point, const FlowConfig& cfg) {
  cfg.validate();
  if (prev_pyr.num_levels() < 1 || !inside(prev_pyr.levels.front(), point)) {
    fail(ErrorCode::kOutOfBounds, "flow point outside frame");
  }
  auto flow = try_pyramidal_flow(prev_pyr, next_pyr, point, cfg);
  if (!flow) fail(ErrorCode::kSingularSystem, "every pyramid level was singular");
  return *flow;
}

ValidatedFlow forward_backward_check(const ImagePyramid& prev_pyr, const ImagePyramid& next_pyr,
                                     const Point2& point, const FlowConfig& cfg) {
  ValidatedFlow result;
  if (prev_pyr.num_levels() < 1 || !inside(prev_pyr.levels.front(), point)) return result;

  const auto forward = try_pyramidal_flow(prev_pyr, next_pyr, point, cfg);
  if (!forward) return result;
  result.flow = *forward;

  const Point2 landed = point + forward->as_vector();
  if (!inside(next_pyr.levels.front(), landed)) return result;
  const auto backward = try_pyramidal_flow(next_pyr, prev_pyr, landed, cfg);
  if (!backward) return result;

  result.fb_error = (forward->as_vector() + backward->as_vector()).norm();
  result.valid = result.fb_error <= cfg.fb_threshold_tau;
  return result;
}

}  // namespace facialpulse
