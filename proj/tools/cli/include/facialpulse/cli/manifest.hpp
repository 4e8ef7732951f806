#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace facialpulse::cli {

inline constexpr int kManifestFormatVersion = 1;

struct ManifestSample {
  std::string sample_id;
  std::optional<double> label;
  std::optional<double> smoothness;
  std::string split;                          // "train", "test" or empty
  std::map<std::string, std::string> paths;  // relative to the manifest's directory
};

struct Manifest {
  std::string preset;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> generator;  // config the tree was made with
  std::vector<ManifestSample> samples;
};

std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(const std::string& text, const std::string& source_name);
Manifest read_manifest(const std::filesystem::path& path);

// Absolute location of `key` for `sample`; kFormat when the entry lacks it.
std::filesystem::path sample_path(const std::filesystem::path& manifest_path,
                                  const ManifestSample& sample, const std::string& key);

}  // namespace facialpulse::cli
