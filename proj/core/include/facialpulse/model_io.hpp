#pragma once

#include <string>

#include "facialpulse/neural.hpp"
#include "facialpulse/pipeline.hpp"

namespace facialpulse {

inline constexpr int kModelFormatVersion = 1;

// JSON documents. Every tensor is stored as {rows, cols, data} with data
// row-major. Readers reject any format_version other than
// kModelFormatVersion with kUnknownFormatVersion.
std::string serialize_regressor(const BiGruRegressor& model, const AdamState* optimizer = nullptr);
BiGruRegressor deserialize_regressor(const std::string& text, AdamState* optimizer = nullptr);

struct DualStreamCheckpoint {
  const AdamState* optimizer_a = nullptr;
  const AdamState* optimizer_b = nullptr;
};

std::string serialize_dual_stream(const DualStreamModel& model, const DualStreamCheckpoint& checkpoint = {});
DualStreamModel deserialize_dual_stream(const std::string& text);

void save_dual_stream(const std::string& path, const DualStreamModel& model,
                      const DualStreamCheckpoint& checkpoint = {});
DualStreamModel load_dual_stream(const std::string& path);

}  // namespace facialpulse
