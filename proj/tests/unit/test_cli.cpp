#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "facialpulse/cli/app.hpp"
#include "facialpulse/cli/manifest.hpp"
#include "facialpulse/cli/run_config.hpp"
#include "facialpulse/cli/tables.hpp"
#include "facialpulse/error.hpp"
#include "facialpulse/feature_io.hpp"
#include "facialpulse/landmark_io.hpp"
#include "facialpulse/text_format.hpp"

namespace fs = std::filesystem;
namespace fp = facialpulse;
namespace cli = facialpulse::cli;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("facialpulse_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_data_rows(const fp::FeatureSequence& s) { return static_cast<std::size_t>(s.length()); }

// Tiny regression dataset plus a matching fast training config.
fs::path make_dataset(const fs::path& dir) {
  write(dir / "cfg.json", R"({"seed": 4,
    "synth": {"num_samples": 6, "num_frames": 8, "train_fraction": 0.5},
    "train": {"epochs": 2, "hidden_units": 3, "target_len": 8, "batch_size": 2}})");
  const auto r = run({"synth", "--preset", "regression-dataset", "--out", (dir / "data").string(), "--config",
                      (dir / "cfg.json").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  return dir / "data";
}

}  // namespace

TEST(RunConfig, StrictKeys) {
  EXPECT_EQ(cli::parse_run_config(R"({"seed": 3, "flow": {"window_n": 9}})", "c.json").flow.window_n, 9);
  try {
    cli::parse_run_config(R"({"flow": {"windw": 9}})", "c.json");
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_EQ(e.code(), fp::ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("flow.windw"), std::string::npos);
  }
  EXPECT_THROW(cli::parse_run_config(R"({"train": {"epochs": "many"}})", "c.json"), fp::Error);
  EXPECT_THROW(cli::parse_run_config(R"({"alignment": "projective"})", "c.json"), fp::Error);
  EXPECT_THROW(cli::resolve_template("other"), fp::Error);
}

TEST(Manifest, RoundTripAndVersion) {
  cli::Manifest m;
  m.preset = "regression-dataset";
  m.seed = 9;
  m.generator = {{"num_frames", 8}};
  cli::ManifestSample s;
  s.sample_id = "s0000";
  s.label = 12.5;
  s.split = "train";
  s.paths = {{"features_a", "s0000/features_a.csv"}};
  m.samples.push_back(s);
  const auto text = cli::format_manifest(m);
  const auto back = cli::parse_manifest(text, "m.json");
  EXPECT_EQ(cli::format_manifest(back), text);
  EXPECT_EQ(cli::sample_path("/x/y/manifest.json", back.samples[0], "features_a"),
            fs::path("/x/y/s0000/features_a.csv"));
  EXPECT_THROW(cli::sample_path("m.json", back.samples[0], "truth"), fp::Error);
  try {
    cli::parse_manifest(R"({"format_version": 7})", "m.json");
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_EQ(e.code(), fp::ErrorCode::kUnknownFormatVersion);
  }
}

TEST(Tables, KeyedCsv) {
  const std::vector<cli::KeyedValue> rows{{"a", 1.5}, {"b", -2}};
  const auto text = cli::format_keyed_csv(rows, "label");
  EXPECT_EQ(text, "sample_id,label\na,1.5\nb,-2\n");
  const auto back = cli::parse_keyed_csv(text, "l.csv", "label");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].value, -2.0);
  EXPECT_THROW(cli::parse_keyed_csv("sample_id,label\na,1\na,2\n", "d.csv", "label"), fp::Error);
  EXPECT_THROW(cli::parse_keyed_csv("id,label\na,1\n", "h.csv", "label"), fp::Error);
}

TEST(Cli, HelpExitsZeroForEveryCommand) {
  for (const std::string cmd : {"calibrate", "features", "train", "predict", "evaluate", "synth"}) {
    const auto r = run({cmd, "--help"});
    EXPECT_EQ(r.code, 0) << cmd;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, UnknownConfigKeyIsInputError) {
  const auto dir = scratch("cfgkey");
  write(dir / "cfg.json", R"({"kalman": {"q": 1}})");
  const auto r = run({"features", "--config", (dir / "cfg.json").string(), "--landmarks", "x.csv", "--out-a", "a",
                      "--out-b", "b"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("kalman.q"), std::string::npos) << r.err;
}

TEST(Cli, MissingAndMalformedInputsExitTwo) {
  const auto dir = scratch("missing");
  EXPECT_EQ(run({"features", "--landmarks", (dir / "nope.csv").string(), "--out-a", "a", "--out-b", "b"}).code, 2);
  write(dir / "bad.csv", "frame,lmk,x,y\n0,0,1,2\n");
  const auto r = run({"features", "--landmarks", (dir / "bad.csv").string(), "--out-a", (dir / "a.csv").string(),
                      "--out-b", (dir / "b.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.csv:1"), std::string::npos) << r.err;
  EXPECT_EQ(run({"features", "--out-a", "a", "--out-b", "b"}).code, 2);
  EXPECT_EQ(run({"synth", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"synth", "--preset", "faces", "--out", dir.string()}).code, 2);
}

TEST(Cli, FeaturesRowCounts) {
  const auto dir = scratch("features");
  const auto t = fp::AlignmentTemplate::standard68();
  fp::LandmarkSequence seq(5);
  for (int i = 0; i < 5; ++i) {
    seq[static_cast<std::size_t>(i)].frame_index = i;
    for (const auto& p : t.canonical_points) seq[static_cast<std::size_t>(i)].points.push_back(100.0 * p);
  }
  write(dir / "lm.csv", fp::format_landmark_csv(seq));
  const auto r = run({"features", "--landmarks", (dir / "lm.csv").string(), "--out-a", (dir / "a.csv").string(),
                      "--out-b", (dir / "b.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = fp::read_feature_csv((dir / "a.csv").string());
  const auto b = fp::read_feature_csv((dir / "b.csv").string());
  EXPECT_EQ(count_data_rows(a), 5u);
  EXPECT_EQ(count_data_rows(b), 4u);
  EXPECT_EQ(a.dimension(), 136);
  EXPECT_LT(b.values.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Cli, EvaluatePerfectPredictions) {
  const auto dir = scratch("evaluate");
  write(dir / "p.csv", "sample_id,prediction\nx,3\ny,4\n");
  write(dir / "l.csv", "sample_id,label\ny,4\nx,3\n");
  const auto r = run({"evaluate", "--predictions", (dir / "p.csv").string(), "--labels", (dir / "l.csv").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "RMSE=0 MAE=0\n");

  write(dir / "z.csv", "sample_id,prediction\nx,0\ny,0\n");
  const auto w = run({"evaluate", "--predictions", (dir / "z.csv").string(), "--labels", (dir / "l.csv").string(),
                      "--report", (dir / "r.csv").string()});
  EXPECT_EQ(w.out, "RMSE=" + fp::format_real(std::sqrt(12.5)) + " MAE=3.5\n");
  EXPECT_EQ(slurp(dir / "r.csv").rfind("sample_id,label,prediction,residual\n", 0), 0u);

  write(dir / "short.csv", "sample_id,prediction\nx,3\n");
  EXPECT_EQ(run({"evaluate", "--predictions", (dir / "short.csv").string(), "--labels", (dir / "l.csv").string()}).code,
            2);
}

TEST(Cli, SynthRegressionDatasetIsDeterministic) {
  const auto one = make_dataset(scratch("synth1"));
  const auto two = make_dataset(scratch("synth2"));
  EXPECT_EQ(slurp(one / "manifest.json"), slurp(two / "manifest.json"));
  EXPECT_EQ(slurp(one / "labels.csv"), slurp(two / "labels.csv"));
  EXPECT_EQ(slurp(one / "s0003" / "features_b.csv"), slurp(two / "s0003" / "features_b.csv"));
  const auto labels = cli::read_keyed_csv((one / "labels.csv").string(), "label");
  ASSERT_EQ(labels.size(), 6u);
  for (const auto& l : labels) {
    EXPECT_GE(l.value, 0.0);
    EXPECT_LE(l.value, 63.0);
  }
  const auto m = cli::read_manifest(one / "manifest.json");
  EXPECT_EQ(m.samples[0].split, "train");
  EXPECT_EQ(m.samples[5].split, "test");
}

TEST(Cli, SynthUnwritableOutputExitsTwo) {
  const auto dir = scratch("unwritable");
  write(dir / "file", "x");
  EXPECT_EQ(run({"synth", "--preset", "regression-dataset", "--out", (dir / "file" / "sub").string()}).code, 2);
}

TEST(Cli, CalibrationBenchThenCalibrate) {
  const auto dir = scratch("bench");
  write(dir / "cfg.json", R"({"synth": {"num_frames": 4, "num_landmarks": 12}})");
  auto r = run({"synth", "--preset", "calibration-bench", "--seed", "3", "--out", (dir / "bench").string(),
                "--config", (dir / "cfg.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"truth.csv", "detections.csv", "outliers.csv", "manifest.json", "frames/frame_00003.pgm"}) {
    EXPECT_TRUE(fs::exists(dir / "bench" / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "bench" / "outliers.csv").rfind("frame,landmark\n", 0), 0u);
  r = run({"calibrate", "--frames", (dir / "bench" / "frames").string(), "--landmarks",
           (dir / "bench" / "detections.csv").string(), "--out", (dir / "cal.csv").string(), "--report",
           (dir / "report.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto in = fp::read_landmark_csv((dir / "bench" / "detections.csv").string());
  const auto out = fp::read_landmark_csv((dir / "cal.csv").string());
  ASSERT_EQ(out.size(), in.size());
  EXPECT_EQ(out[0].points.size(), 12u);
  EXPECT_NE(slurp(dir / "report.json").find("rejected_flow_count"), std::string::npos);
  EXPECT_NE(r.err.find("calibrated 4 frames"), std::string::npos);

  // frame count disagrees with the landmark file
  fs::remove(dir / "bench" / "frames" / "frame_00003.pgm");
  r = run({"calibrate", "--frames", (dir / "bench" / "frames").string(), "--landmarks",
           (dir / "bench" / "detections.csv").string(), "--out", (dir / "cal2.csv").string()});
  EXPECT_NE(r.code, 0);
}

TEST(Cli, TrainPredictRoundTrip) {
  const auto dir = scratch("train");
  const auto data = make_dataset(dir);
  const auto cfg = (dir / "cfg.json").string();
  auto r = run({"train", "--manifest", (data / "manifest.json").string(), "--model-out", (dir / "m.json").string(),
                "--log-out", (dir / "log.csv").string(), "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "log.csv").rfind("epoch,stream,mean_loss\n", 0), 0u);

  r = run({"predict", "--model", (dir / "m.json").string(), "--a", (data / "s0004" / "features_a.csv").string(),
           "--b", (data / "s0004" / "features_b.csv").string(), "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto value = fp::parse_real(r.out.substr(0, r.out.size() - 1));
  ASSERT_TRUE(value.has_value()) << r.out;

  r = run({"predict", "--model", (dir / "m.json").string(), "--manifest", (data / "manifest.json").string(),
           "--split", "test", "--out", (dir / "pred.csv").string(), "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto preds = cli::read_keyed_csv((dir / "pred.csv").string(), "prediction");
  ASSERT_EQ(preds.size(), 3u);
  EXPECT_EQ(preds[1].sample_id, "s0004");
  EXPECT_EQ(preds[1].value, *value);

  auto text = slurp(dir / "m.json");
  const auto pos = text.find("\"format_version\": 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 19, "\"format_version\": 2");
  write(dir / "m2.json", text);
  r = run({"predict", "--model", (dir / "m2.json").string(), "--a", (data / "s0004" / "features_a.csv").string(),
           "--b", (data / "s0004" / "features_b.csv").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ExecutableReportsExitCodes) {
  const std::string exe = FACIALPULSE_EXE;
  EXPECT_EQ(std::system((exe + " --help > /dev/null").c_str()), 0);
  const int status = std::system((exe + " features --landmarks /nonexistent.csv --out-a a --out-b b 2> /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
