#include "nbf/report.hpp"

#include <cstdio>
#include <map>

namespace nbf {

std::string MetricReport::to_csv() const {
  std::string out = "utterance,condition,si_sdr_db,estoi\n";
  char num[64];
  for (const auto& r : rows) {
    out += r.utterance + "," + r.condition + ",";
    std::snprintf(num, sizeof num, "%.6f", r.si_sdr_db);
    out += num;
    out += ",";
    std::snprintf(num, sizeof num, "%.6f", r.estoi);
    out += num;
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json MetricReport::aggregate() const {
  struct Acc {
    std::size_t count = 0;
    double si_sdr = 0.0, estoi = 0.0;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> by_condition;
  Acc overall;
  for (const auto& r : rows) {
    if (!by_condition.count(r.condition)) order.push_back(r.condition);
    auto& a = by_condition[r.condition];
    ++a.count;
    a.si_sdr += r.si_sdr_db;
    a.estoi += r.estoi;
    ++overall.count;
    overall.si_sdr += r.si_sdr_db;
    overall.estoi += r.estoi;
  }
  auto summary = [](const Acc& a) {
    nlohmann::ordered_json j;
    j["count"] = a.count;
    j["si_sdr_db"] = a.count ? a.si_sdr / static_cast<double>(a.count) : 0.0;
    j["estoi"] = a.count ? a.estoi / static_cast<double>(a.count) : 0.0;
    return j;
  };
  nlohmann::ordered_json out;
  out["conditions"] = nlohmann::ordered_json::object();
  for (const auto& c : order) out["conditions"][c] = summary(by_condition[c]);
  out["overall"] = summary(overall);
  return out;
}

}  // namespace nbf
