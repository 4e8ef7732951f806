#include "facialpulse/cli/run_config.hpp"

#include <initializer_list>
#include <json.hpp>
#include <limits>

#include "facialpulse/error.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse::cli {
namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json* node, std::string prefix, const std::string& source)
      : node_(node), prefix_(std::move(prefix)), source_(source) {
    if (node_ != nullptr && !node_->is_object()) bad_type("", "an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : node_->items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) fail(ErrorCode::kFormat, source_ + ": unknown configuration key '" + path(key) + "'");
    }
  }

  Section child(const char* key) const {
    const json* sub = find(key);
    return Section(sub, path(key), source_);
  }

  void read(const char* key, int& dst) const {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) bad_type(key, "an integer");
      const auto raw = v->get<long long>();
      if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max()) {
        bad_type(key, "a 32-bit integer");
      }
      dst = static_cast<int>(raw);
    }
  }
  void read(const char* key, std::uint64_t& dst) const {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) bad_type(key, "a non-negative integer");
      dst = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& dst) const {
    if (const json* v = find(key)) {
      if (!v->is_number()) bad_type(key, "a number");
      dst = v->get<double>();
    }
  }
  void read(const char* key, bool& dst) const {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) bad_type(key, "a boolean");
      dst = v->get<bool>();
    }
  }
  void read(const char* key, std::string& dst) const {
    if (const json* v = find(key)) {
      if (!v->is_string()) bad_type(key, "a string");
      dst = v->get<std::string>();
    }
  }
  template <class T>
  void read(const char* key, std::optional<T>& dst) const {
    if (find(key) == nullptr) return;
    T value{};
    read(key, value);
    dst = value;
  }

 private:
  const json* find(const char* key) const {
    if (node_ == nullptr) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }
  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  [[noreturn]] void bad_type(const std::string& key, const char* expected) const {
    const std::string where = key.empty() ? (prefix_.empty() ? "<root>" : prefix_) : path(key);
    fail(ErrorCode::kFormat, source_ + ": configuration key '" + where + "' must be " + expected);
  }

  const json* node_;
  std::string prefix_;
  const std::string& source_;
};

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kFormat, source_name + ": " + e.what());
  }
  RunConfig cfg;
  const Section root(&doc, "", source_name);
  root.allow({"seed", "flow", "kalman", "template", "alignment", "train", "paths", "synth"});
  root.read("seed", cfg.seed);
  root.read("template", cfg.template_name);
  std::string alignment = "similarity";
  root.read("alignment", alignment);
  if (alignment == "similarity") {
    cfg.alignment = AlignmentMode::kSimilarity;
  } else if (alignment == "affine") {
    cfg.alignment = AlignmentMode::kAffine;
  } else {
    fail(ErrorCode::kFormat, source_name + ": alignment must be \"similarity\" or \"affine\"");
  }

  const auto flow = root.child("flow");
  flow.allow({"window_n", "num_levels", "scale_factor", "max_iterations", "convergence_eps",
              "min_eigen", "fb_threshold_tau"});
  flow.read("window_n", cfg.flow.window_n);
  flow.read("num_levels", cfg.flow.num_levels);
  flow.read("scale_factor", cfg.flow.scale_factor);
  flow.read("max_iterations", cfg.flow.max_iterations);
  flow.read("convergence_eps", cfg.flow.convergence_eps);
  flow.read("min_eigen", cfg.flow.min_eigen);
  flow.read("fb_threshold_tau", cfg.flow.fb_threshold_tau);

  const auto kalman = root.child("kalman");
  kalman.allow({"process_noise_q", "measurement_noise_r", "reject_inflation"});
  kalman.read("process_noise_q", cfg.kalman.process_noise_q);
  kalman.read("measurement_noise_r", cfg.kalman.measurement_noise_r);
  kalman.read("reject_inflation", cfg.kalman.reject_inflation);

  const auto train = root.child("train");
  train.allow({"epochs", "learning_rate", "batch_size", "target_len", "joint_loss", "hidden_units",
               "pooling", "input_dropout", "hidden_dropout", "clip_norm", "standardize_inputs",
               "init_head_bias_to_label_mean"});
  auto& t = cfg.train;
  train.read("epochs", t.epochs);
  train.read("learning_rate", t.learning_rate);
  train.read("batch_size", t.batch_size);
  train.read("target_len", t.target_len);
  train.read("joint_loss", t.joint_loss);
  train.read("hidden_units", t.hidden_units);
  std::string pooling = pooling_name(t.pooling);
  train.read("pooling", pooling);
  try {
    t.pooling = parse_pooling(pooling);
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, source_name + ": train.pooling: " + e.what());
  }
  train.read("input_dropout", t.input_dropout);
  train.read("hidden_dropout", t.hidden_dropout);
  train.read("clip_norm", t.clip_norm);
  train.read("standardize_inputs", t.standardize_inputs);
  train.read("init_head_bias_to_label_mean", t.init_head_bias_to_label_mean);

  const auto paths = root.child("paths");
  paths.allow({"frames", "landmarks", "out", "report", "out_a", "out_b", "manifest", "model_out",
               "log_out", "model", "a", "b", "predictions", "labels"});
  auto& p = cfg.paths;
  paths.read("frames", p.frames);
  paths.read("landmarks", p.landmarks);
  paths.read("out", p.out);
  paths.read("report", p.report);
  paths.read("out_a", p.out_a);
  paths.read("out_b", p.out_b);
  paths.read("manifest", p.manifest);
  paths.read("model_out", p.model_out);
  paths.read("log_out", p.log_out);
  paths.read("model", p.model);
  paths.read("a", p.a);
  paths.read("b", p.b);
  paths.read("predictions", p.predictions);
  paths.read("labels", p.labels);

  const auto synth = root.child("synth");
  synth.allow({"num_samples", "num_frames", "num_landmarks", "width", "height", "motion_amplitude",
               "motion_smoothness", "smoothness_min", "smoothness_max", "jitter_sigma",
               "outlier_rate", "outlier_magnitude", "blob_sigma", "train_fraction"});
  auto& s = cfg.synth;
  synth.read("num_samples", s.num_samples);
  synth.read("num_frames", s.num_frames);
  synth.read("num_landmarks", s.num_landmarks);
  synth.read("width", s.width);
  synth.read("height", s.height);
  synth.read("motion_amplitude", s.motion_amplitude);
  synth.read("motion_smoothness", s.motion_smoothness);
  synth.read("smoothness_min", s.smoothness_min);
  synth.read("smoothness_max", s.smoothness_max);
  synth.read("jitter_sigma", s.jitter_sigma);
  synth.read("outlier_rate", s.outlier_rate);
  synth.read("outlier_magnitude", s.outlier_magnitude);
  synth.read("blob_sigma", s.blob_sigma);
  synth.read("train_fraction", s.train_fraction);

  resolve_template(cfg.template_name);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path), path);
}

AlignmentTemplate resolve_template(const std::string& name) {
  if (name == "standard68") return AlignmentTemplate::standard68();
  fail(ErrorCode::kFormat, "unknown template '" + name + "' (available: standard68)");
}

}  // namespace facialpulse::cli
