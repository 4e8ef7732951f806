#include "facialpulse/cli/app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <stdexcept>

#include "facialpulse/calibration.hpp"
#include "facialpulse/cli/manifest.hpp"
#include "facialpulse/cli/run_config.hpp"
#include "facialpulse/cli/tables.hpp"
#include "facialpulse/error.hpp"
#include "facialpulse/feature_io.hpp"
#include "facialpulse/landmark_io.hpp"
#include "facialpulse/model_io.hpp"
#include "facialpulse/pgm.hpp"
#include "facialpulse/random.hpp"
#include "facialpulse/synth.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse::cli {
namespace {

namespace fs = std::filesystem;

// Missing or contradictory command-line input; reported with exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kTagBenchTexture = 21;

struct PathFlag {
  std::string value;
  CLI::Option* option = nullptr;
};

void add_path(CLI::App* cmd, PathFlag& flag, const std::string& name, const std::string& help) {
  flag.option = cmd->add_option(name, flag.value, help);
}

// Flag value if given, otherwise the config's value.
std::optional<std::string> pick(const PathFlag& flag, const std::optional<std::string>& from_config) {
  if (flag.option != nullptr && flag.option->count() > 0) return flag.value;
  return from_config;
}

std::string require(const PathFlag& flag, const std::optional<std::string>& from_config,
                    const std::string& config_key) {
  auto value = pick(flag, from_config);
  if (!value) throw UsageError(flag.option->get_name() + " is required (or paths." + config_key + " in --config)");
  return *value;
}

struct CommonFlags {
  std::string config_path;
  CLI::Option* config = nullptr;
  std::uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_seed) {
  flags.config = cmd->add_option("--config", flags.config_path, "JSON run configuration; flags override it");
  if (with_seed) flags.seed_option = cmd->add_option("--seed", flags.seed, "global seed (overrides config 'seed')");
}

RunConfig load_config(const CommonFlags& flags) {
  RunConfig cfg = flags.config->count() > 0 ? load_run_config(flags.config_path) : RunConfig{};
  if (flags.seed_option != nullptr && flags.seed_option->count() > 0) cfg.seed = flags.seed;
  cfg.train.seed = cfg.seed;
  return cfg;
}

void ensure_parent(const fs::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create directory '" + parent.string() + "': " + ec.message());
}

void write_file(const fs::path& path, const std::string& contents) {
  ensure_parent(path);
  write_text_file(path.string(), contents);
}

// ---------------------------------------------------------------- calibrate

struct CalibrateFlags {
  CommonFlags common;
  PathFlag frames, landmarks, out, report;
};

std::string format_calibration_report(const CalibrationReport& r) {
  nlohmann::ordered_json doc;
  doc["frames"] = r.frames;
  doc["landmarks"] = r.landmarks;
  doc["rejected_flow_count"] = r.rejected_flow_count();
  doc["mean_fb_error"] = r.mean_fb_error();
  doc["rejected_per_landmark"] = r.rejected_per_landmark;
  doc["mean_fb_error_per_frame"] = r.mean_fb_error_per_frame;
  return doc.dump(1) + "\n";
}

void cmd_calibrate(const CalibrateFlags& f, std::ostream& err) {
  const RunConfig cfg = load_config(f.common);
  const auto frames_dir = require(f.frames, cfg.paths.frames, "frames");
  const auto landmarks_path = require(f.landmarks, cfg.paths.landmarks, "landmarks");
  const auto out_path = require(f.out, cfg.paths.out, "out");
  const auto report_path = pick(f.report, cfg.paths.report);

  const auto detections = read_landmark_csv(landmarks_path);
  auto frames = read_pgm_directory(frames_dir);
  // Frames are matched to landmark frames by position; the CSV's indices win.
  if (frames.size() == detections.size()) {
    for (std::size_t t = 0; t < frames.size(); ++t) frames[t].set_frame_index(detections[t].frame_index);
  }
  const auto result = calibrate_sequence(frames, detections, cfg.flow, cfg.kalman);
  write_file(out_path, format_landmark_csv(result.calibrated));
  if (report_path) write_file(*report_path, format_calibration_report(result.report));
  err << "calibrated " << result.report.frames << " frames x " << result.report.landmarks
      << " landmarks, rejected flows: " << result.report.rejected_flow_count() << "\n";
}

// ---------------------------------------------------------------- features

struct FeaturesFlags {
  CommonFlags common;
  PathFlag landmarks, out_a, out_b;
};

void cmd_features(const FeaturesFlags& f) {
  const RunConfig cfg = load_config(f.common);
  const auto landmarks_path = require(f.landmarks, cfg.paths.landmarks, "landmarks");
  const auto out_a = require(f.out_a, cfg.paths.out_a, "out_a");
  const auto out_b = require(f.out_b, cfg.paths.out_b, "out_b");
  const auto seq = read_landmark_csv(landmarks_path, LandmarkSource::kCalibrated);
  const auto templ = resolve_template(cfg.template_name);
  const auto a = absolute_features(seq, templ, cfg.alignment);
  const auto b = differential_features(a);
  write_file(out_a, format_feature_csv(a));
  write_file(out_b, format_feature_csv(b));
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  CommonFlags common;
  PathFlag manifest, model_out, log_out;
  int epochs = 0;
  CLI::Option* epochs_option = nullptr;
  bool joint_loss = false;
  CLI::Option* joint_option = nullptr;
};

TrainingSample load_training_sample(const fs::path& manifest_path, const ManifestSample& s) {
  TrainingSample sample;
  sample.absolute = read_feature_csv(sample_path(manifest_path, s, "features_a").string());
  sample.differential = read_feature_csv(sample_path(manifest_path, s, "features_b").string());
  sample.label = *s.label;
  return sample;
}

void cmd_train(const TrainFlags& f, std::ostream& err) {
  RunConfig cfg = load_config(f.common);
  const fs::path manifest_path = require(f.manifest, cfg.paths.manifest, "manifest");
  const auto model_out = require(f.model_out, cfg.paths.model_out, "model_out");
  const auto log_out = pick(f.log_out, cfg.paths.log_out);
  if (f.epochs_option->count() > 0) cfg.train.epochs = f.epochs;
  if (f.joint_option->count() > 0) cfg.train.joint_loss = f.joint_loss;
  cfg.train.template_hash = template_hash(resolve_template(cfg.template_name));

  const auto manifest = read_manifest(manifest_path);
  std::vector<TrainingSample> samples;
  for (const auto& s : manifest.samples) {
    if (!s.split.empty() && s.split != "train") continue;
    if (!s.label) fail(ErrorCode::kFormat, manifest_path.string() + ": sample '" + s.sample_id + "' has no label");
    samples.push_back(load_training_sample(manifest_path, s));
  }
  err << "training on " << samples.size() << " samples for " << cfg.train.epochs << " epochs\n";
  const auto result = train(samples, cfg.train);
  ensure_parent(model_out);
  save_dual_stream(model_out, result.model);
  if (log_out) write_file(*log_out, format_loss_log(result.loss_log));
}

// ---------------------------------------------------------------- predict

struct PredictFlags {
  CommonFlags common;
  PathFlag model, a, b, manifest, out;
  std::string split;
};

void cmd_predict(const PredictFlags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(f.common);
  const auto model_path = require(f.model, cfg.paths.model, "model");
  const auto model = load_dual_stream(model_path);
  const auto expected_hash = template_hash(resolve_template(cfg.template_name));
  if (model.metadata.template_hash != 0 && model.metadata.template_hash != expected_hash) {
    err << "warning: model was trained with a different alignment template\n";
  }

  const auto manifest_path = pick(f.manifest, cfg.paths.manifest);
  if (!manifest_path) {
    const auto a = read_feature_csv(require(f.a, cfg.paths.a, "a"));
    const auto b = read_feature_csv(require(f.b, cfg.paths.b, "b"));
    out << format_real(predict(model, a, b)) << "\n";
    return;
  }
  const auto manifest = read_manifest(*manifest_path);
  std::vector<KeyedValue> rows;
  for (const auto& s : manifest.samples) {
    if (!f.split.empty() && s.split != f.split) continue;
    const auto a = read_feature_csv(sample_path(*manifest_path, s, "features_a").string());
    const auto b = read_feature_csv(sample_path(*manifest_path, s, "features_b").string());
    rows.push_back({s.sample_id, predict(model, a, b)});
  }
  const auto table = format_keyed_csv(rows, "prediction");
  if (const auto out_path = pick(f.out, cfg.paths.predictions)) {
    write_file(*out_path, table);
  } else {
    out << table;
  }
}

// ---------------------------------------------------------------- evaluate

struct EvaluateFlags {
  CommonFlags common;
  PathFlag predictions, labels, report;
};

void cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  const RunConfig cfg = load_config(f.common);
  const auto pred_path = require(f.predictions, cfg.paths.predictions, "predictions");
  const auto label_path = require(f.labels, cfg.paths.labels, "labels");
  const auto preds = read_keyed_csv(pred_path, "prediction");
  const auto labels = read_keyed_csv(label_path, "label");

  std::map<std::string, double> by_id;
  for (const auto& p : preds) by_id[p.sample_id] = p.value;
  if (by_id.size() != labels.size()) {
    fail(ErrorCode::kFormat, pred_path + " has " + std::to_string(by_id.size()) + " rows but " + label_path +
                                 " has " + std::to_string(labels.size()));
  }
  std::vector<double> p, l;
  std::vector<EvaluationRow> rows;
  for (const auto& lab : labels) {
    const auto it = by_id.find(lab.sample_id);
    if (it == by_id.end()) fail(ErrorCode::kFormat, pred_path + ": no prediction for sample '" + lab.sample_id + "'");
    p.push_back(it->second);
    l.push_back(lab.value);
    rows.push_back({lab.sample_id, lab.value, it->second});
  }
  const auto result = evaluate(p, l);
  out << "RMSE=" << format_real(result.rmse) << " MAE=" << format_real(result.mae) << "\n";
  if (const auto report = pick(f.report, std::nullopt)) write_file(*report, format_evaluation_report(rows));
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  CommonFlags common;
  std::string preset;
  PathFlag out;
};

std::string frame_file_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%05zu.pgm", t);
  return buf;
}

std::string sample_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%04zu", i);
  return buf;
}

std::string format_outliers(const std::vector<std::vector<bool>>& flags, const LandmarkSequence& frames) {
  std::string out = "frame,landmark\n";
  for (std::size_t t = 0; t < flags.size(); ++t) {
    for (std::size_t j = 0; j < flags[t].size(); ++j) {
      if (flags[t][j]) out += std::to_string(frames[t].frame_index) + "," + std::to_string(j) + "\n";
    }
  }
  return out;
}

void write_calibration_bench(const RunConfig& cfg, const fs::path& root) {
  TrajectoryConfig traj = calibration_bench_config(cfg.seed);
  const auto& o = cfg.synth;
  if (o.num_frames) traj.num_frames = *o.num_frames;
  if (o.num_landmarks) traj.num_landmarks = *o.num_landmarks;
  if (o.width) traj.width = *o.width;
  if (o.height) traj.height = *o.height;
  if (o.motion_amplitude) traj.motion_amplitude = *o.motion_amplitude;
  if (o.motion_smoothness) traj.motion_smoothness = *o.motion_smoothness;
  if (o.jitter_sigma) traj.jitter_sigma = *o.jitter_sigma;
  if (o.outlier_rate) traj.outlier_rate = *o.outlier_rate;
  if (o.outlier_magnitude) traj.outlier_magnitude = *o.outlier_magnitude;
  RenderConfig render;
  render.width = traj.width;
  render.height = traj.height;
  if (o.blob_sigma) render.blob_sigma = *o.blob_sigma;
  render.texture_seed = derive_seed(cfg.seed, {kTagBenchTexture});

  const auto truth = gen_trajectory(traj);
  const auto noisy = add_detection_noise(truth, traj);
  const auto frames = render_frames(truth, render);

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto path = root / "frames" / frame_file_name(t);
    ensure_parent(path);
    write_pgm(path, frames[t]);
  }
  write_file(root / "truth.csv", format_landmark_csv(truth));
  write_file(root / "detections.csv", format_landmark_csv(noisy.frames));
  write_file(root / "outliers.csv", format_outliers(noisy.outliers, noisy.frames));

  Manifest m;
  m.preset = "calibration-bench";
  m.seed = cfg.seed;
  m.generator = {{"num_frames", traj.num_frames},
                 {"num_landmarks", traj.num_landmarks},
                 {"width", traj.width},
                 {"height", traj.height},
                 {"motion_amplitude", traj.motion_amplitude},
                 {"motion_smoothness", traj.motion_smoothness},
                 {"jitter_sigma", traj.jitter_sigma},
                 {"outlier_rate", traj.outlier_rate},
                 {"outlier_magnitude", traj.outlier_magnitude},
                 {"blob_sigma", render.blob_sigma}};
  ManifestSample s;
  s.sample_id = "bench";
  s.paths = {{"frames", "frames"},
             {"truth", "truth.csv"},
             {"detections", "detections.csv"},
             {"outliers", "outliers.csv"}};
  m.samples.push_back(std::move(s));
  write_file(root / "manifest.json", format_manifest(m));
}

void write_regression_dataset(const RunConfig& cfg, const fs::path& root) {
  RegressionDatasetConfig rc;
  int n_samples = 200;
  double train_fraction = 0.8;
  const auto& o = cfg.synth;
  if (o.num_samples) n_samples = *o.num_samples;
  if (o.num_frames) rc.num_frames = *o.num_frames;
  if (o.num_landmarks) rc.num_landmarks = *o.num_landmarks;
  if (o.width) rc.width = *o.width;
  if (o.height) rc.height = *o.height;
  if (o.motion_amplitude) rc.motion_amplitude = *o.motion_amplitude;
  if (o.smoothness_min) rc.smoothness_min = *o.smoothness_min;
  if (o.smoothness_max) rc.smoothness_max = *o.smoothness_max;
  if (o.jitter_sigma) rc.jitter_sigma = *o.jitter_sigma;
  if (o.outlier_rate) rc.outlier_rate = *o.outlier_rate;
  if (o.outlier_magnitude) rc.outlier_magnitude = *o.outlier_magnitude;
  if (o.blob_sigma) rc.blob_sigma = *o.blob_sigma;
  if (o.train_fraction) train_fraction = *o.train_fraction;
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "synth.train_fraction must lie in [0, 1]");
  }

  const auto samples = gen_regression_dataset(n_samples, rc, cfg.seed);
  const auto templ = resolve_template(cfg.template_name);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n_samples));

  Manifest m;
  m.preset = "regression-dataset";
  m.seed = cfg.seed;
  m.generator = {{"num_samples", n_samples},
                 {"num_frames", rc.num_frames},
                 {"num_landmarks", rc.num_landmarks},
                 {"width", rc.width},
                 {"height", rc.height},
                 {"motion_amplitude", rc.motion_amplitude},
                 {"smoothness_min", rc.smoothness_min},
                 {"smoothness_max", rc.smoothness_max},
                 {"jitter_sigma", rc.jitter_sigma},
                 {"outlier_rate", rc.outlier_rate},
                 {"outlier_magnitude", rc.outlier_magnitude},
                 {"train_fraction", train_fraction}};
  std::vector<KeyedValue> labels;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& sample = samples[i];
    const std::string id = sample_name(i);
    const fs::path dir = root / id;
    auto a = absolute_features(sample.noisy_detections, templ, cfg.alignment);
    a.label = sample.label;
    auto b = differential_features(a);
    b.label = sample.label;
    write_file(dir / "truth.csv", format_landmark_csv(sample.ground_truth));
    write_file(dir / "detections.csv", format_landmark_csv(sample.noisy_detections));
    write_file(dir / "features_a.csv", format_feature_csv(a));
    write_file(dir / "features_b.csv", format_feature_csv(b));

    ManifestSample entry;
    entry.sample_id = id;
    entry.label = sample.label;
    entry.smoothness = sample.smoothness;
    entry.split = i < n_train ? "train" : "test";
    entry.paths = {{"truth", id + "/truth.csv"},
                   {"detections", id + "/detections.csv"},
                   {"features_a", id + "/features_a.csv"},
                   {"features_b", id + "/features_b.csv"}};
    m.samples.push_back(std::move(entry));
    labels.push_back({id, sample.label});
  }
  write_file(root / "labels.csv", format_keyed_csv(labels, "label"));
  write_file(root / "manifest.json", format_manifest(m));
}

void cmd_synth(const SynthFlags& f) {
  const RunConfig cfg = load_config(f.common);
  const fs::path root = require(f.out, cfg.paths.out, "out");
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) {
    fail(ErrorCode::kIo, "cannot create output directory '" + root.string() + "'" +
                             (ec ? ": " + ec.message() : std::string{}));
  }
  if (f.preset == "calibration-bench") {
    write_calibration_bench(cfg, root);
  } else {
    write_regression_dataset(cfg, root);
  }
}

int run_parsed(const std::function<void()>& action, std::ostream& err) {
  try {
    action();
    return kExitSuccess;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_input_error() ? kExitInputError : kExitComputeError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitComputeError;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Landmark calibration, dual-stream feature extraction and BiGRU severity regression."};
  app.name("facialpulse");
  app.require_subcommand(1);
  std::function<void()> action;

  CalibrateFlags calibrate;
  auto* c = app.add_subcommand("calibrate", "Refine detected landmarks with validated optical flow and a Kalman filter");
  add_path(c, calibrate.frames, "--frames", "directory of P5 PGM frames (sorted by filename)");
  add_path(c, calibrate.landmarks, "--landmarks", "detected landmarks CSV (frame,landmark,x,y)");
  add_path(c, calibrate.out, "--out", "calibrated landmarks CSV to write");
  add_path(c, calibrate.report, "--report", "calibration report JSON to write");
  add_common(c, calibrate.common, false);
  c->callback([&] { action = [&] { cmd_calibrate(calibrate, err); }; });

  FeaturesFlags features;
  auto* fe = app.add_subcommand("features", "Align landmarks and write the absolute (A) and differential (B) streams");
  add_path(fe, features.landmarks, "--landmarks", "calibrated landmarks CSV");
  add_path(fe, features.out_a, "--out-a", "stream A feature CSV to write");
  add_path(fe, features.out_b, "--out-b", "stream B feature CSV to write (one row fewer)");
  add_common(fe, features.common, false);
  fe->callback([&] { action = [&] { cmd_features(features); }; });

  TrainFlags training;
  auto* tr = app.add_subcommand("train", "Train the dual-stream BiGRU regressor from a dataset manifest");
  add_path(tr, training.manifest, "--manifest", "dataset manifest JSON; samples with split 'train' or no split are used");
  add_path(tr, training.model_out, "--model-out", "model JSON to write");
  add_path(tr, training.log_out, "--log-out", "loss log CSV (epoch,stream,mean_loss) to write");
  training.epochs_option = tr->add_option("--epochs", training.epochs, "number of epochs (overrides train.epochs)")
                               ->check(CLI::PositiveNumber);
  training.joint_option = tr->add_flag("--joint-loss", training.joint_loss,
                                       "back-propagate through the averaged prediction");
  add_common(tr, training.common, true);
  tr->callback([&] { action = [&] { cmd_train(training, err); }; });

  PredictFlags prediction;
  auto* pr = app.add_subcommand("predict", "Score one sample (--a/--b) or every sample of a manifest");
  add_path(pr, prediction.model, "--model", "trained model JSON");
  add_path(pr, prediction.a, "--a", "stream A feature CSV");
  add_path(pr, prediction.b, "--b", "stream B feature CSV");
  add_path(pr, prediction.manifest, "--manifest", "batch mode: score the samples of this manifest");
  add_path(pr, prediction.out, "--out", "batch mode: predictions CSV to write instead of standard output");
  pr->add_option("--split", prediction.split, "batch mode: only samples with this split");
  add_common(pr, prediction.common, false);
  pr->callback([&] { action = [&] { cmd_predict(prediction, out, err); }; });

  EvaluateFlags evaluation;
  auto* ev = app.add_subcommand("evaluate", "Compare predictions with labels and print RMSE and MAE");
  add_path(ev, evaluation.predictions, "--predictions", "predictions CSV (sample_id,prediction)");
  add_path(ev, evaluation.labels, "--labels", "labels CSV (sample_id,label)");
  add_path(ev, evaluation.report, "--report", "per-sample CSV (sample_id,label,prediction,residual) to write");
  add_common(ev, evaluation.common, false);
  ev->callback([&] { action = [&] { cmd_evaluate(evaluation, out); }; });

  SynthFlags synth;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic dataset tree with a manifest");
  sy->add_option("--preset", synth.preset, "calibration-bench or regression-dataset")
      ->required()
      ->check(CLI::IsMember({"calibration-bench", "regression-dataset"}));
  add_path(sy, synth.out, "--out", "output directory");
  add_common(sy, synth.common, true);
  sy->callback([&] { action = [&] { cmd_synth(synth); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitInputError;
  }
  return run_parsed(action, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("facialpulse");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace facialpulse::cli
