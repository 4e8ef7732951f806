#include "facialpulse/cli/tables.hpp"

#include <set>
#include <sstream>

#include "facialpulse/error.hpp"
#include "facialpulse/text_format.hpp"

namespace facialpulse::cli {

std::vector<KeyedValue> parse_keyed_csv(const std::string& text, const std::string& source_name,
                                        const std::string& value_column) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto where = [&] { return source_name + ":" + std::to_string(line_no) + ": "; };
  const std::string header = "sample_id," + value_column;
  if (!std::getline(in, line)) fail(ErrorCode::kFormat, source_name + ": empty file");
  ++line_no;
  if (trim(line) != header) fail(ErrorCode::kFormat, where() + "expected header '" + header + "'");

  std::vector<KeyedValue> rows;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != 2) fail(ErrorCode::kFormat, where() + "expected 2 fields");
    const std::string id(trim(fields[0]));
    if (id.empty()) fail(ErrorCode::kFormat, where() + "empty sample_id");
    const auto value = parse_real(trim(fields[1]));
    if (!value) fail(ErrorCode::kFormat, where() + "'" + std::string(fields[1]) + "' is not a finite real");
    if (!seen.insert(id).second) fail(ErrorCode::kFormat, where() + "duplicate sample_id '" + id + "'");
    rows.push_back({id, *value});
  }
  return rows;
}

std::vector<KeyedValue> read_keyed_csv(const std::string& path, const std::string& value_column) {
  return parse_keyed_csv(read_text_file(path), path, value_column);
}

std::string format_keyed_csv(const std::vector<KeyedValue>& rows, const std::string& value_column) {
  std::string out = "sample_id," + value_column + "\n";
  for (const auto& r : rows) out += r.sample_id + "," + format_real(r.value) + "\n";
  return out;
}

std::string format_loss_log(const std::vector<LossRecord>& log) {
  std::string out = "epoch,stream,mean_loss\n";
  for (const auto& r : log) out += std::to_string(r.epoch) + "," + r.stream + "," + format_real(r.mean_loss) + "\n";
  return out;
}

std::string format_evaluation_report(const std::vector<EvaluationRow>& rows) {
  std::string out = "sample_id,label,prediction,residual\n";
  for (const auto& r : rows) {
    out += r.sample_id + "," + format_real(r.label) + "," + format_real(r.prediction) + "," +
           format_real(r.prediction - r.label) + "\n";
  }
  return out;
}

}  // namespace facialpulse::cli
