#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facialpulse/landmarks.hpp"

namespace facialpulse {

// Canonical landmark layout in unit-square coordinates. The standard
// 68-point template puts the midpoint of the inner eye corners (landmarks
// 39 and 42) at (0.5, 0.4), 0.3 apart.
struct AlignmentTemplate {
  std::vector<Point2> canonical_points;

  static AlignmentTemplate standard68();
  int size() const noexcept { return static_cast<int>(canonical_points.size()); }
};

inline constexpr int kLeftInnerEyeCorner = 39;
inline constexpr int kRightInnerEyeCorner = 42;

// FNV-1a over the shortest decimal rendering of every coordinate.
std::uint64_t template_hash(const AlignmentTemplate& templ);

struct SimilarityTransform {
  double scale = 1.0;
  double rotation = 0.0;  // radians
  Point2 translation = Point2::Zero();

  Point2 apply(const Point2& p) const;
};

struct AffineTransform {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Point2 translation = Point2::Zero();

  Point2 apply(const Point2& p) const { return linear * p + translation; }
};

enum class AlignmentMode { kSimilarity, kAffine };

// Closed-form least-squares similarity mapping `points` onto the template.
// Throws kDegenerateConfiguration when all points coincide.
SimilarityTransform fit_similarity(const std::vector<Point2>& points, const AlignmentTemplate& templ);

// Full 6-DOF least-squares fit; kept for ablations.
AffineTransform fit_affine(const std::vector<Point2>& points, const AlignmentTemplate& templ);

std::vector<Point2> align_points(const std::vector<Point2>& points, const AlignmentTemplate& templ,
                                 AlignmentMode mode = AlignmentMode::kSimilarity);

enum class StreamKind { kAbsolute, kDifferential };

std::string stream_kind_name(StreamKind kind);

// One row per timestep, 2P columns laid out x1, y1, x2, y2, ...
struct FeatureSequence {
  Eigen::MatrixXd values;
  StreamKind kind = StreamKind::kAbsolute;
  std::optional<double> label;

  int length() const noexcept { return static_cast<int>(values.rows()); }
  int dimension() const noexcept { return static_cast<int>(values.cols()); }
};

Eigen::RowVectorXd flatten_points(const std::vector<Point2>& points);
std::vector<Point2> unflatten_points(const Eigen::Ref<const Eigen::RowVectorXd>& row);

FeatureSequence absolute_features(const LandmarkSequence& calibrated, const AlignmentTemplate& templ,
                                  AlignmentMode mode = AlignmentMode::kSimilarity);

FeatureSequence differential_features(const FeatureSequence& absolute);

// Uniform subsampling to target_len rows (endpoints kept), or padding by
// repeating the final row when the input is shorter.
FeatureSequence temporal_resample(const FeatureSequence& seq, int target_len);

}  // namespace facialpulse
