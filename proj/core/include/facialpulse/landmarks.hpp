#pragma once

#include <vector>

#include "facialpulse/flow.hpp"

namespace facialpulse {

inline constexpr int kDefaultLandmarkCount = 68;

enum class LandmarkSource { kDetected, kCalibrated };

// The points of one frame, in standard 68-landmark order.
struct LandmarkFrame {
  int frame_index = 0;
  std::vector<Point2> points;
  LandmarkSource source = LandmarkSource::kDetected;
};

using LandmarkSequence = std::vector<LandmarkFrame>;

// Checks finiteness, a common point count, and strictly increasing frame
// indices. Returns the point count.
int validate_landmark_sequence(const LandmarkSequence& frames);

}  // namespace facialpulse
