#pragma once

#include <string>

#include "facialpulse/landmarks.hpp"

namespace facialpulse {

// CSV with header `frame,landmark,x,y`, rows sorted by (frame, landmark),
// landmark ids 0..P-1 complete for every frame. Violations throw kFormat
// naming the source and line.
LandmarkSequence parse_landmark_csv(const std::string& text, const std::string& source_name,
                                    LandmarkSource source = LandmarkSource::kDetected);
LandmarkSequence read_landmark_csv(const std::string& path,
                                   LandmarkSource source = LandmarkSource::kDetected);

std::string format_landmark_csv(const LandmarkSequence& frames);
void write_landmark_csv(const std::string& path, const LandmarkSequence& frames);

}  // namespace facialpulse
