#include "facialpulse/cli/manifest.hpp"

#include <json.hpp>

#include "facialpulse/error.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse::cli {

using nlohmann::ordered_json;

std::string format_manifest(const Manifest& manifest) {
  ordered_json doc;
  doc["format_version"] = kManifestFormatVersion;
  doc["preset"] = manifest.preset;
  doc["seed"] = manifest.seed;
  ordered_json generator = ordered_json::object();
  for (const auto& [key, value] : manifest.generator) generator[key] = value;
  doc["generator"] = generator;
  ordered_json samples = ordered_json::array();
  for (const auto& s : manifest.samples) {
    ordered_json entry;
    entry["sample_id"] = s.sample_id;
    if (s.label) entry["label"] = *s.label;
    if (s.smoothness) entry["smoothness"] = *s.smoothness;
    if (!s.split.empty()) entry["split"] = s.split;
    ordered_json paths = ordered_json::object();
    for (const auto& [key, value] : s.paths) paths[key] = value;
    entry["paths"] = paths;
    samples.push_back(entry);
  }
  doc["samples"] = samples;
  return doc.dump(1) + "\n";
}

Manifest parse_manifest(const std::string& text, const std::string& source_name) {
  Manifest m;
  try {
    const auto doc = ordered_json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kManifestFormatVersion) {
      fail(ErrorCode::kUnknownFormatVersion,
           source_name + ": manifest format_version " + std::to_string(version) + " is not supported");
    }
    m.preset = doc.value("preset", std::string{});
    m.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("generator")) {
      for (const auto& [key, value] : doc.at("generator").items()) m.generator.emplace_back(key, value.get<double>());
    }
    for (const auto& entry : doc.at("samples")) {
      ManifestSample s;
      s.sample_id = entry.at("sample_id").get<std::string>();
      if (entry.contains("label")) s.label = entry.at("label").get<double>();
      if (entry.contains("smoothness")) s.smoothness = entry.at("smoothness").get<double>();
      s.split = entry.value("split", std::string{});
      for (const auto& [key, value] : entry.at("paths").items()) s.paths[key] = value.get<std::string>();
      m.samples.push_back(std::move(s));
    }
  } catch (const ordered_json::exception& e) {
    fail(ErrorCode::kFormat, source_name + ": " + e.what());
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path.string()), path.string());
}

std::filesystem::path sample_path(const std::filesystem::path& manifest_path,
                                  const ManifestSample& sample, const std::string& key) {
  const auto it = sample.paths.find(key);
  if (it == sample.paths.end()) {
    fail(ErrorCode::kFormat, manifest_path.string() + ": sample '" + sample.sample_id +
                                 "' has no '" + key + "' path");
  }
  return manifest_path.parent_path() / it->second;
}

}  // namespace facialpulse::cli
