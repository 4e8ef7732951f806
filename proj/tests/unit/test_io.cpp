#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "facialpulse/error.hpp"
#include "facialpulse/feature_io.hpp"
#include "facialpulse/landmark_io.hpp"
#include "facialpulse/model_io.hpp"
#include "facialpulse/pgm.hpp"
#include "facialpulse/pipeline.hpp"
#include "facialpulse/text_format.hpp"

namespace fp = facialpulse;
namespace fs = std::filesystem;

namespace {

fp::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const fp::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return fp::ErrorCode::kInvalidArgument;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("facialpulse_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(TextFormat, RealRoundTrip) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456789.123456789, -0.0}) {
    const auto s = fp::format_real(v);
    const auto back = fp::parse_real(s);
    ASSERT_TRUE(back.has_value()) << s;
    EXPECT_EQ(*back, v);
  }
  EXPECT_EQ(fp::format_real(0.0), "0");
  EXPECT_FALSE(fp::parse_real("nan").has_value());
  EXPECT_FALSE(fp::parse_real("1.5x").has_value());
  EXPECT_FALSE(fp::parse_real("").has_value());
  EXPECT_EQ(fp::parse_real("+3").value(), 3.0);
  EXPECT_EQ(fp::parse_integer("42").value(), 42);
  EXPECT_FALSE(fp::parse_integer("4.2").has_value());
}

TEST(Pgm, RoundTrip) {
  std::vector<double> px;
  for (int i = 0; i < 12; ++i) px.push_back(i * 20.0);
  const fp::GrayFrame f(4, 3, px);
  const auto bytes = fp::encode_pgm(f);
  const auto back = fp::decode_pgm(bytes);
  EXPECT_EQ(back.width(), 4);
  EXPECT_EQ(back.height(), 3);
  EXPECT_EQ(back.pixels().values(), px);
}

TEST(Pgm, HeaderComments) {
  std::string bytes = "P5\n# made by hand\n2 1\n# another\n255\n";
  bytes += static_cast<char>(7);
  bytes += static_cast<char>(200);
  const auto f = fp::decode_pgm(bytes);
  EXPECT_EQ(f.at(0, 0), 7.0);
  EXPECT_EQ(f.at(1, 0), 200.0);
}

TEST(Pgm, RejectsOtherFormats) {
  EXPECT_EQ(code_of([] { fp::decode_pgm("P2\n1 1\n255\n7\n", "ascii.pgm"); }), fp::ErrorCode::kFormat);
  EXPECT_EQ(code_of([] { fp::decode_pgm(std::string("P5\n1 1\n65535\n\0\0", 16), "deep.pgm"); }), fp::ErrorCode::kFormat);
  EXPECT_EQ(code_of([] { fp::decode_pgm("P5\n2 2\n255\nab", "short.pgm"); }), fp::ErrorCode::kFormat);
  try {
    fp::decode_pgm("P6\n1 1\n255\nabc", "color.pgm");
  } catch (const fp::Error& e) {
    EXPECT_NE(std::string(e.what()).find("color.pgm"), std::string::npos);
  }
}

TEST(Pgm, DirectoryIsSortedByName) {
  const auto dir = scratch_dir("pgmdir");
  for (int v : {3, 1, 2}) {
    fp::write_pgm(dir / ("f" + std::to_string(v) + ".pgm"), fp::GrayFrame(1, 1, {static_cast<double>(v)}));
  }
  std::ofstream(dir / "notes.txt") << "ignored";
  const auto frames = fp::read_pgm_directory(dir);
  ASSERT_EQ(frames.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(frames[static_cast<std::size_t>(i)].at(0, 0), i + 1.0);
    EXPECT_EQ(frames[static_cast<std::size_t>(i)].frame_index(), i);
  }
  EXPECT_EQ(code_of([&] { fp::read_pgm(dir / "missing.pgm"); }), fp::ErrorCode::kIo);
}

TEST(LandmarkCsv, RoundTrip) {
  fp::LandmarkSequence seq(2);
  seq[0].frame_index = 4;
  seq[0].points = {{1.25, 2.5}, {3.0, -4.0}};
  seq[1].frame_index = 5;
  seq[1].points = {{0.1, 0.2}, {1e-7, 99.0}};
  const auto text = fp::format_landmark_csv(seq);
  EXPECT_EQ(text.substr(0, 17), "frame,landmark,x,");
  const auto back = fp::parse_landmark_csv(text, "mem.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].frame_index, 5);
  EXPECT_EQ(back[1].points[1], seq[1].points[1]);
  EXPECT_EQ(back[0].points[0], seq[0].points[0]);
}

TEST(LandmarkCsv, ErrorsNameFileAndLine) {
  const std::string bad_header = "frame,lm,x,y\n0,0,1,2\n";
  try {
    fp::parse_landmark_csv(bad_header, "bad.csv");
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_EQ(e.code(), fp::ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("bad.csv:1"), std::string::npos);
  }
  const std::string bad_value = "frame,landmark,x,y\n0,0,1,2\n0,1,abc,2\n";
  try {
    fp::parse_landmark_csv(bad_value, "v.csv");
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_NE(std::string(e.what()).find("v.csv:3"), std::string::npos);
  }
  // landmark ids must be contiguous and the count consistent
  EXPECT_EQ(code_of([] { fp::parse_landmark_csv("frame,landmark,x,y\n0,1,1,2\n", "g.csv"); }), fp::ErrorCode::kFormat);
  EXPECT_EQ(code_of([] {
              fp::parse_landmark_csv("frame,landmark,x,y\n0,0,1,2\n0,1,1,2\n1,0,1,2\n", "c.csv");
            }),
            fp::ErrorCode::kFormat);
  EXPECT_EQ(code_of([] { fp::read_landmark_csv("/nonexistent/x.csv"); }), fp::ErrorCode::kIo);
}

TEST(FeatureCsv, RoundTrip) {
  fp::FeatureSequence seq;
  seq.values = Eigen::MatrixXd::Random(3, 4);
  seq.kind = fp::StreamKind::kDifferential;
  seq.label = 12.5;
  const auto text = fp::format_feature_csv(seq);
  EXPECT_EQ(text.rfind("# stream=differential\n# label=12.5\n", 0), 0u);
  const auto back = fp::parse_feature_csv(text, "f.csv");
  EXPECT_EQ(back.kind, fp::StreamKind::kDifferential);
  EXPECT_EQ(back.label.value(), 12.5);
  EXPECT_EQ(back.values, seq.values);

  seq.label.reset();
  const auto none = fp::parse_feature_csv(fp::format_feature_csv(seq), "g.csv");
  EXPECT_FALSE(none.label.has_value());
}

TEST(FeatureCsv, RejectsMalformed) {
  EXPECT_EQ(code_of([] { fp::parse_feature_csv("1,2\n", "a.csv"); }), fp::ErrorCode::kFormat);
  EXPECT_EQ(code_of([] { fp::parse_feature_csv("# stream=other\n# label=none\n1,2\n", "a.csv"); }),
            fp::ErrorCode::kFormat);
  EXPECT_EQ(code_of([] { fp::parse_feature_csv("# stream=absolute\n# label=none\n1,2\n1\n", "a.csv"); }),
            fp::ErrorCode::kFormat);
}

TEST(ModelIo, RegressorRoundTripIsExact) {
  auto model = fp::init_bigru(5, 3, 17);
  model.weights.head_b = 0.123456789;
  model.pooling = fp::Pooling::kMeanOverTime;
  auto opt = fp::AdamState::for_weights(model.weights);
  opt.step = 4;
  opt.m.head_b = 0.5;
  const auto text = fp::serialize_regressor(model, &opt);
  fp::AdamState back_opt;
  const auto back = fp::deserialize_regressor(text, &back_opt);
  EXPECT_EQ(back.pooling, fp::Pooling::kMeanOverTime);
  EXPECT_EQ(back.weights.forward.w_h, model.weights.forward.w_h);
  EXPECT_EQ(back.weights.backward.u_r, model.weights.backward.u_r);
  EXPECT_EQ(back.weights.head_w, model.weights.head_w);
  EXPECT_EQ(back.weights.head_b, model.weights.head_b);
  EXPECT_EQ(back_opt.step, 4);
  EXPECT_EQ(back_opt.m.head_b, 0.5);
  EXPECT_EQ(fp::serialize_regressor(back, &back_opt), text);
}

TEST(ModelIo, TensorsAreRowMajor) {
  auto model = fp::init_bigru(2, 1, 3);
  model.weights.forward.w_z << 1.5, 2.5;
  const auto text = fp::serialize_regressor(model);
  EXPECT_NE(text.find("1.5,\n"), std::string::npos);
}

TEST(ModelIo, DualStreamRoundTripAndVersionCheck) {
  fp::DualStreamModel m;
  m.stream_a = fp::init_bigru(4, 2, 1);
  m.stream_b = fp::init_bigru(4, 2, 2);
  m.normalizer_a = fp::FeatureNormalizer::identity(4);
  m.normalizer_b = fp::FeatureNormalizer::identity(4);
  m.normalizer_b.mean(2) = 3.25;
  m.metadata = {77, 12, 5};
  const auto text = fp::serialize_dual_stream(m);
  const auto back = fp::deserialize_dual_stream(text);
  EXPECT_EQ(back.metadata.template_hash, 77u);
  EXPECT_EQ(back.metadata.target_len, 12);
  EXPECT_EQ(back.normalizer_b.mean(2), 3.25);
  EXPECT_EQ(fp::serialize_dual_stream(back), text);

  std::string wrong = text;
  const auto pos = wrong.find("\"format_version\": 1");
  ASSERT_NE(pos, std::string::npos);
  wrong.replace(pos, 19, "\"format_version\": 9");
  EXPECT_EQ(code_of([&] { fp::deserialize_dual_stream(wrong); }), fp::ErrorCode::kUnknownFormatVersion);
  EXPECT_EQ(code_of([] { fp::deserialize_dual_stream("{"); }), fp::ErrorCode::kFormat);
  EXPECT_EQ(code_of([] { fp::deserialize_dual_stream("{\"format_version\": 1}"); }), fp::ErrorCode::kFormat);
}
