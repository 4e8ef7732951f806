#pragma once

#include <limits>
#include <optional>

#include <Eigen/Core>

#include "facialpulse/imaging.hpp"

namespace facialpulse {

using Point2 = Eigen::Vector2d;

struct FlowVector {
  double u = 0.0;  // px / frame along x
  double v = 0.0;  // px / frame along y

  Point2 as_vector() const { return {u, v}; }
  double norm() const;
};

struct FlowConfig {
  int window_n = 15;  // odd; the solve uses all window_n^2 pixels
  int num_levels = 3;
  double scale_factor = 0.5;
  int max_iterations = 10;
  double convergence_eps = 0.01;
  double min_eigen = 1e-4;
  double fb_threshold_tau = 1.0;

  // Throws kInvalidArgument on an even window or a non-positive threshold.
  void validate() const;
  PyramidConfig pyramid() const;
};

struct ValidatedFlow {
  FlowVector flow;
  bool valid = false;
  double fb_error = std::numeric_limits<double>::infinity();
};

// Symmetric 2x2 structure tensor [sxx sxy; sxy syy] accumulated over a
// window, with its eigen-decomposition used for the singularity guard.
struct NormalMatrix {
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;

  double min_eigenvalue() const;
  double max_eigenvalue() const;
};

// Diagnostics of one LK solve, exposed for property tests.
struct LkTrace {
  NormalMatrix normal;
  int iterations = 0;
  bool converged = false;
};

// Single-level iterative Lucas-Kanade at `point` starting from
// `initial_guess`. Throws kSingularSystem on an untextured patch.
FlowVector lk_point_flow(const GrayFrame& prev, const GrayFrame& next, const Point2& point,
                         const FlowVector& initial_guess, const FlowConfig& cfg);

// Same solve with the gradient field of `prev` supplied by the caller.
// Returns nullopt instead of throwing when the system is singular.
std::optional<FlowVector> try_lk_point_flow(const GrayFrame& prev, const GradientField& prev_grad,
                                            const GrayFrame& next, const Point2& point,
                                            const FlowVector& initial_guess, const FlowConfig& cfg,
                                            LkTrace* trace = nullptr);

// Coarse-to-fine flow. A level with a singular system passes its incoming
// guess down unchanged; kSingularSystem is thrown only if every level fails.
FlowVector pyramidal_flow(const ImagePyramid& prev_pyr, const ImagePyramid& next_pyr,
                          const Point2& point, const FlowConfig& cfg);
std::optional<FlowVector> try_pyramidal_flow(const ImagePyramid& prev_pyr,
                                             const ImagePyramid& next_pyr, const Point2& point,
                                             const FlowConfig& cfg);

// Forward flow plus the round-trip consistency test. Never throws for a
// singular patch: the result is simply marked invalid.
ValidatedFlow forward_backward_check(const ImagePyramid& prev_pyr, const ImagePyramid& next_pyr,
                                     const Point2& point, const FlowConfig& cfg);

}  // namespace facialpulse
