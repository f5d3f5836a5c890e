#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace nbf {

struct MetricRow {
  std::string utterance;
  std::string condition;
  double si_sdr_db = 0.0;
  double estoi = 0.0;
};

/// Per-utterance scores plus means per condition (SIR bucket).
struct MetricReport {
  std::vector<MetricRow> rows;

  /// "utterance,condition,si_sdr_db,estoi" with six decimals, rows in order.
  std::string to_csv() const;
  /// {"conditions": {label: {count, si_sdr_db, estoi}}, "overall": {...}}
  /// with conditions in first-appearance order.
  nlohmann::ordered_json aggregate() const;
};

}  // namespace nbf
