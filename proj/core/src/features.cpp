#include "facialpulse/features.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/QR>

#include "facialpulse/error.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse {

AlignmentTemplate AlignmentTemplate::standard68() {
  using std::numbers::pi;
  std::vector<Point2> pts;
  pts.reserve(68);

  // 0-16 jaw, left ear to chin to right ear.
  for (int i = 0; i <= 16; ++i) {
    const double phi = pi - pi * i / 16.0;
    pts.emplace_back(0.5 + 0.38 * std::cos(phi), 0.40 + 0.47 * std::sin(phi));
  }
  // 17-21 and 22-26 brows.
  for (int side = 0; side < 2; ++side) {
    const double x0 = side == 0 ? 0.20 : 0.58;
    for (int i = 0; i < 5; ++i) {
      const double x = x0 + 0.055 * i;
      pts.emplace_back(x, 0.31 - 0.03 * std::sin(pi * i / 4.0));
    }
  }
  // 27-30 nose bridge.
  for (int i = 0; i < 4; ++i) pts.emplace_back(0.5, 0.40 + 0.055 * i);
  // 31-35 nose base.
  const double nose_x[] = {0.43, 0.465, 0.5, 0.535, 0.57};
  const double nose_y[] = {0.60, 0.61, 0.615, 0.61, 0.60};
  for (int i = 0; i < 5; ++i) pts.emplace_back(nose_x[i], nose_y[i]);
  // 36-41 and 42-47 eyes, starting at the corner nearest the image edge for
  // the left eye and at the inner corner for the right eye.
  const double eye_dx[] = {0.0, 0.043, 0.087, 0.13, 0.087, 0.043};
  const double eye_dy[] = {0.0, -0.025, -0.025, 0.0, 0.025, 0.025};
  for (int i = 0; i < 6; ++i) pts.emplace_back(0.22 + eye_dx[i], 0.40 + eye_dy[i]);
  for (int i = 0; i < 6; ++i) pts.emplace_back(0.65 + eye_dx[i], 0.40 + eye_dy[i]);
  // 48-59 outer lip, 60-67 inner lip; both start at the left corner and
  // run over the upper lip first.
  for (int i = 0; i < 12; ++i) {
    const double theta = pi + i * pi / 6.0;
    pts.emplace_back(0.5 + 0.14 * std::cos(theta), 0.73 + 0.065 * std::sin(theta));
  }
  for (int i = 0; i < 8; ++i) {
    const double theta = pi + i * pi / 4.0;
    pts.emplace_back(0.5 + 0.085 * std::cos(theta), 0.73 + 0.025 * std::sin(theta));
  }
  return AlignmentTemplate{std::move(pts)};
}

std::uint64_t template_hash(const AlignmentTemplate& templ) {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](const std::string& s) {
    for (unsigned char c : s) {
      hash ^= c;
      hash *= 1099511628211ULL;
    }
  };
  for (const auto& p : templ.canonical_points) {
    mix(format_real(p.x()));
    mix(",");
    mix(format_real(p.y()));
    mix(";");
  }
  return hash;
}

Point2 SimilarityTransform::apply(const Point2& p) const {
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  return Point2{scale * (c * p.x() - s * p.y()), scale * (s * p.x() + c * p.y())} + translation;
}

namespace {

void check_sizes(const std::vector<Point2>& points, const AlignmentTemplate& templ) {
  if (points.size() < 2) fail(ErrorCode::kDegenerateConfiguration, "alignment needs >= 2 points");
  if (points.size() != templ.canonical_points.size()) {
    fail(ErrorCode::kInconsistentDimensions,
         std::to_string(points.size()) + " points against a " +
             std::to_string(templ.canonical_points.size()) + "-point template");
  }
}

Point2 centroid(const std::vector<Point2>& pts) {
  Point2 c = Point2::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

}  // namespace

SimilarityTransform fit_similarity(const std::vector<Point2>& points, const AlignmentTemplate& templ) {
  check_sizes(points, templ);
  const auto& target = templ.canonical_points;
  const Point2 pc = centroid(points);
  const Point2 tc = centroid(target);

  double dot = 0.0;
  double cross = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point2 p = points[i] - pc;
    const Point2 t = target[i] - tc;
    dot += p.x() * t.x() + p.y() * t.y();
    cross += p.x() * t.y() - p.y() * t.x();
    spread += p.squaredNorm();
  }
  if (!(spread > 1e-24 * static_cast<double>(points.size()) * (1.0 + pc.squaredNorm()))) {
    fail(ErrorCode::kDegenerateConfiguration, "all landmark points coincide");
  }

  SimilarityTransform tf;
  tf.scale = std::hypot(dot, cross) / spread;
  tf.rotation = std::atan2(cross, dot);
  tf.translation = Point2::Zero();
  tf.translation = tc - tf.apply(pc);
  return tf;
}

AffineTransform fit_affine(const std::vector<Point2>& points, const AlignmentTemplate& templ) {
  check_sizes(points, templ);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::MatrixXd rhs(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    design.row(i) << p.x(), p.y(), 1.0;
    rhs.row(i) = templ.canonical_points[static_cast<std::size_t>(i)].transpose();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) fail(ErrorCode::kDegenerateConfiguration, "collinear or coincident landmarks");
  const Eigen::MatrixXd solution = qr.solve(rhs);  // 3 x 2
  AffineTransform tf;
  tf.linear = solution.topRows<2>().transpose();
  tf.translation = solution.row(2).transpose();
  return tf;
}

std::vector<Point2> align_points(const std::vector<Point2>& points, const AlignmentTemplate& templ,
                                 AlignmentMode mode) {
  std::vector<Point2> out;
  out.reserve(points.size());
  if (mode == AlignmentMode::kSimilarity) {
    const auto tf = fit_similarity(points, templ);
    for (const auto& p : points) out.push_back(tf.apply(p));
  } else {
    const auto tf = fit_affine(points, templ);
    for (const auto& p : points) out.push_back(tf.apply(p));
  }
  return out;
}

std::string stream_kind_name(StreamKind kind) {
  return kind == StreamKind::kAbsolute ? "absolute" : "differential";
}

Eigen::RowVectorXd flatten_points(const std::vector<Point2>& points) {
  Eigen::RowVectorXd row(2 * static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    row(2 * static_cast<Eigen::Index>(j)) = points[j].x();
    row(2 * static_cast<Eigen::Index>(j) + 1) = points[j].y();
  }
  return row;
}

std::vector<Point2> unflatten_points(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() % 2 != 0) fail(ErrorCode::kDimensionMismatch, "feature vector of odd length");
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(row.size() / 2));
  for (Eigen::Index j = 0; j < row.size(); j += 2) pts.emplace_back(row(j), row(j + 1));
  return pts;
}

FeatureSequence absolute_features(const LandmarkSequence& calibrated, const AlignmentTemplate& templ,
                                  AlignmentMode mode) {
  if (calibrated.empty()) fail(ErrorCode::kEmptyInput, "no landmark frames");
  const auto dim = 2 * static_cast<Eigen::Index>(templ.canonical_points.size());
  FeatureSequence seq;
  seq.kind = StreamKind::kAbsolute;
  seq.values.resize(static_cast<Eigen::Index>(calibrated.size()), dim);
  for (std::size_t t = 0; t < calibrated.size(); ++t) {
    try {
      seq.values.row(static_cast<Eigen::Index>(t)) =
          flatten_points(align_points(calibrated[t].points, templ, mode));
    } catch (const Error& e) {
      fail(e.code(), "frame " + std::to_string(calibrated[t].frame_index) + ": " + e.what());
    }
  }
  return seq;
}

FeatureSequence differential_features(const FeatureSequence& absolute) {
  if (absolute.length() < 2) {
    fail(ErrorCode::kTooShort, "differential stream needs >= 2 absolute vectors, got " +
                                   std::to_string(absolute.length()));
  }
  FeatureSequence seq;
  seq.kind = StreamKind::kDifferential;
  seq.label = absolute.label;
  const Eigen::Index n = absolute.values.rows();
  seq.values = absolute.values.bottomRows(n - 1) - absolute.values.topRows(n - 1);
  return seq;
}

FeatureSequence temporal_resample(const FeatureSequence& seq, int target_len) {
  if (target_len < 2) fail(ErrorCode::kInvalidArgument, "target_len must be >= 2");
  if (seq.length() < 1) fail(ErrorCode::kEmptySequence, "cannot resample an empty sequence");
  FeatureSequence out;
  out.kind = seq.kind;
  out.label = seq.label;
  out.values.resize(target_len, seq.values.cols());
  const int n = seq.length();
  if (n >= target_len) {
    for (int i = 0; i < target_len; ++i) {
      const auto src = static_cast<Eigen::Index>(
          std::llround(static_cast<double>(i) * (n - 1) / (target_len - 1)));
      out.values.row(i) = seq.values.row(src);
    }
  } else {
    out.values.topRows(n) = seq.values;
    for (int i = n; i < target_len; ++i) out.values.row(i) = seq.values.row(n - 1);
  }
  return out;
}

}  // namespace facialpulse
