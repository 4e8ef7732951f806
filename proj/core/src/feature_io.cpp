#include "facialpulse/feature_io.hpp"

#include <sstream>
#include <vector>

#include "facialpulse/error.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse {

std::string format_feature_csv(const FeatureSequence& seq) {
  std::string out = "# stream=" + stream_kind_name(seq.kind) + "\n";
  out += "# label=" + (seq.label ? format_real(*seq.label) : std::string("none")) + "\n";
  for (Eigen::Index t = 0; t < seq.values.rows(); ++t) {
    for (Eigen::Index c = 0; c < seq.values.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_real(seq.values(t, c));
    }
    out += '\n';
  }
  return out;
}

FeatureSequence parse_feature_csv(const std::string& text, const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto where = [&] { return source_name + ":" + std::to_string(line_no) + ": "; };

  FeatureSequence seq;
  if (!std::getline(in, line)) fail(ErrorCode::kFormat, source_name + ": empty feature file");
  ++line_no;
  const auto stream = trim(line);
  if (stream == "# stream=absolute") {
    seq.kind = StreamKind::kAbsolute;
  } else if (stream == "# stream=differential") {
    seq.kind = StreamKind::kDifferential;
  } else {
    fail(ErrorCode::kFormat, where() + "expected '# stream=absolute|differential'");
  }
  if (!std::getline(in, line)) fail(ErrorCode::kFormat, source_name + ": missing label header");
  ++line_no;
  const auto label_line = trim(line);
  constexpr std::string_view kLabelPrefix = "# label=";
  if (label_line.substr(0, kLabelPrefix.size()) != kLabelPrefix) {
    fail(ErrorCode::kFormat, where() + "expected '# label=<real|none>'");
  }
  const auto label_text = label_line.substr(kLabelPrefix.size());
  if (label_text != "none") {
    const auto label = parse_real(label_text);
    if (!label) fail(ErrorCode::kFormat, where() + "bad label value");
    seq.label = *label;
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    std::vector<double> row;
    for (const auto field : split(content, ',')) {
      const auto v = parse_real(field);
      if (!v) fail(ErrorCode::kFormat, where() + "bad feature value");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorCode::kFormat, where() + "row has " + std::to_string(row.size()) +
                                   " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::kFormat, source_name + ": no feature rows");
  seq.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t c = 0; c < rows[t].size(); ++c) {
      seq.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = rows[t][c];
    }
  }
  return seq;
}

void write_feature_csv(const std::string& path, const FeatureSequence& seq) {
  write_text_file(path, format_feature_csv(seq));
}

FeatureSequence read_feature_csv(const std::string& path) {
  return parse_feature_csv(read_text_file(path), path);
}

}  // namespace facialpulse
