#include "facialpulse/model_io.hpp"

#include <json.hpp>

#include "facialpulse/error.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse {
namespace {

using nlohmann::json;

json tensors_to_json(const BiGruWeights& w) {
  json out = json::object();
  for (const auto& t : w.tensors()) {
    json data = json::array();
    // Column-major storage written out row by row.
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) data.push_back(t.data[c * t.rows + r]);
    }
    out[t.name] = {{"rows", t.rows}, {"cols", t.cols}, {"data", std::move(data)}};
  }
  return out;
}

void tensors_from_json(const json& doc, BiGruWeights& w) {
  for (auto& t : w.tensors()) {
    if (!doc.contains(t.name)) fail(ErrorCode::kFormat, "model is missing tensor " + t.name);
    const json& entry = doc.at(t.name);
    if (entry.at("rows").get<Eigen::Index>() != t.rows || entry.at("cols").get<Eigen::Index>() != t.cols) {
      fail(ErrorCode::kFormat, "tensor " + t.name + " has the wrong shape");
    }
    const json& data = entry.at("data");
    if (!data.is_array() || data.size() != t.size()) {
      fail(ErrorCode::kFormat, "tensor " + t.name + " has the wrong number of values");
    }
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) t.data[c * t.rows + r] = data[i++].get<double>();
    }
  }
  if (doc.size() != w.tensors().size()) fail(ErrorCode::kFormat, "model has unexpected tensors");
}

void check_version(const json& doc) {
  if (!doc.contains("format_version") || !doc.at("format_version").is_number_integer()) {
    fail(ErrorCode::kFormat, "model document lacks an integer format_version");
  }
  const int version = doc.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    fail(ErrorCode::kUnknownFormatVersion, "model format_version " + std::to_string(version) +
                                               " is not supported (expected " +
                                               std::to_string(kModelFormatVersion) + ")");
  }
}

json regressor_to_json(const BiGruRegressor& model, const AdamState* optimizer) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["d"] = model.input_dim();
  doc["k"] = model.hidden_dim();
  doc["input_dropout"] = model.input_dropout_rate;
  doc["hidden_dropout"] = model.hidden_dropout_rate;
  doc["pooling"] = pooling_name(model.pooling);
  doc["tensors"] = tensors_to_json(model.weights);
  if (optimizer != nullptr) {
    doc["optimizer"] = {{"step", optimizer->step},
                        {"learning_rate", optimizer->config.learning_rate},
                        {"beta1", optimizer->config.beta1},
                        {"beta2", optimizer->config.beta2},
                        {"epsilon", optimizer->config.epsilon},
                        {"m", tensors_to_json(optimizer->m)},
                        {"v", tensors_to_json(optimizer->v)}};
  }
  return doc;
}

BiGruRegressor regressor_from_json(const json& doc, AdamState* optimizer) {
  check_version(doc);
  const int d = doc.at("d").get<int>();
  const int k = doc.at("k").get<int>();
  if (d < 1 || k < 1) fail(ErrorCode::kFormat, "model dimensions must be positive");
  BiGruRegressor model;
  model.weights = BiGruWeights::zeros(d, k);
  model.input_dropout_rate = doc.at("input_dropout").get<double>();
  model.hidden_dropout_rate = doc.at("hidden_dropout").get<double>();
  model.pooling = parse_pooling(doc.at("pooling").get<std::string>());
  tensors_from_json(doc.at("tensors"), model.weights);
  if (optimizer != nullptr && doc.contains("optimizer")) {
    const json& opt = doc.at("optimizer");
    *optimizer = AdamState::for_weights(model.weights);
    optimizer->step = opt.at("step").get<long>();
    optimizer->config.learning_rate = opt.at("learning_rate").get<double>();
    optimizer->config.beta1 = opt.at("beta1").get<double>();
    optimizer->config.beta2 = opt.at("beta2").get<double>();
    optimizer->config.epsilon = opt.at("epsilon").get<double>();
    tensors_from_json(opt.at("m"), optimizer->m);
    tensors_from_json(opt.at("v"), optimizer->v);
  }
  return model;
}

json normalizer_to_json(const FeatureNormalizer& n) {
  return {{"mean", std::vector<double>(n.mean.data(), n.mean.data() + n.mean.size())},
          {"scale", std::vector<double>(n.scale.data(), n.scale.data() + n.scale.size())}};
}

FeatureNormalizer normalizer_from_json(const json& doc, int dim) {
  const auto mean = doc.at("mean").get<std::vector<double>>();
  const auto scale = doc.at("scale").get<std::vector<double>>();
  if (mean.size() != static_cast<std::size_t>(dim) || scale.size() != static_cast<std::size_t>(dim)) {
    fail(ErrorCode::kFormat, "normalizer width does not match the model");
  }
  FeatureNormalizer n;
  n.mean = Eigen::Map<const Eigen::RowVectorXd>(mean.data(), dim);
  n.scale = Eigen::Map<const Eigen::RowVectorXd>(scale.data(), dim);
  return n;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("model is not valid JSON: ") + e.what());
  }
}

}  // namespace

std::string serialize_regressor(const BiGruRegressor& model, const AdamState* optimizer) {
  return regressor_to_json(model, optimizer).dump(1) + "\n";
}

BiGruRegressor deserialize_regressor(const std::string& text, AdamState* optimizer) {
  const json doc = parse_document(text);
  try {
    return regressor_from_json(doc, optimizer);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("malformed model: ") + e.what());
  }
}

std::string serialize_dual_stream(const DualStreamModel& model, const DualStreamCheckpoint& checkpoint) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = "dual_stream";
  doc["metadata"] = {{"template_hash", model.metadata.template_hash},
                     {"target_len", model.metadata.target_len},
                     {"training_seed", model.metadata.training_seed}};
  doc["stream_a"] = regressor_to_json(model.stream_a, checkpoint.optimizer_a);
  doc["stream_b"] = regressor_to_json(model.stream_b, checkpoint.optimizer_b);
  doc["normalizer_a"] = normalizer_to_json(model.normalizer_a);
  doc["normalizer_b"] = normalizer_to_json(model.normalizer_b);
  return doc.dump(1) + "\n";
}

DualStreamModel deserialize_dual_stream(const std::string& text) {
  const json doc = parse_document(text);
  check_version(doc);
  try {
    if (doc.at("kind").get<std::string>() != "dual_stream") {
      fail(ErrorCode::kFormat, "model kind is not dual_stream");
    }
    DualStreamModel model;
    const json& meta = doc.at("metadata");
    model.metadata.template_hash = meta.at("template_hash").get<std::uint64_t>();
    model.metadata.target_len = meta.at("target_len").get<int>();
    model.metadata.training_seed = meta.at("training_seed").get<std::uint64_t>();
    model.stream_a = regressor_from_json(doc.at("stream_a"), nullptr);
    model.stream_b = regressor_from_json(doc.at("stream_b"), nullptr);
    if (model.stream_a.input_dim() != model.stream_b.input_dim()) {
      fail(ErrorCode::kFormat, "stream input widths differ");
    }
    model.normalizer_a = normalizer_from_json(doc.at("normalizer_a"), model.input_dim());
    model.normalizer_b = normalizer_from_json(doc.at("normalizer_b"), model.input_dim());
    if (model.metadata.target_len < 2) fail(ErrorCode::kFormat, "target_len must be >= 2");
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("malformed model: ") + e.what());
  }
}

void save_dual_stream(const std::string& path, const DualStreamModel& model,
                      const DualStreamCheckpoint& checkpoint) {
  write_text_file(path, serialize_dual_stream(model, checkpoint));
}

DualStreamModel load_dual_stream(const std::string& path) {
  return deserialize_dual_stream(read_text_file(path));
}

}  // namespace facialpulse
