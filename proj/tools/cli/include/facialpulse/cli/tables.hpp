#pragma once

#include <string>
#include <vector>

#include "facialpulse/pipeline.hpp"

namespace facialpulse::cli {

struct KeyedValue {
  std::string sample_id;
  double value = 0.0;
};

// Two-column CSV `sample_id,<value_column>`; sample ids must be unique.
std::vector<KeyedValue> parse_keyed_csv(const std::string& text, const std::string& source_name,
                                        const std::string& value_column);
std::vector<KeyedValue> read_keyed_csv(const std::string& path, const std::string& value_column);
std::string format_keyed_csv(const std::vector<KeyedValue>& rows, const std::string& value_column);

// `epoch,stream,mean_loss`
std::string format_loss_log(const std::vector<LossRecord>& log);

struct EvaluationRow {
  std::string sample_id;
  double label = 0.0;
  double prediction = 0.0;
};

// `sample_id,label,prediction,residual`
std::string format_evaluation_report(const std::vector<EvaluationRow>& rows);

}  // namespace facialpulse::cli
