#pragma once

#include <string>

#include "facialpulse/features.hpp"

namespace facialpulse {

// Two header lines, `# stream=absolute|differential` and
// `# label=<real|none>`, then one comma-separated row of 2P reals per
// timestep.
std::string format_feature_csv(const FeatureSequence& seq);
FeatureSequence parse_feature_csv(const std::string& text, const std::string& source_name);

void write_feature_csv(const std::string& path, const FeatureSequence& seq);
FeatureSequence read_feature_csv(const std::string& path);

}  // namespace facialpulse
