#include "crispbench/report_json.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace crispbench {

Json to_json(const BenchmarkConfig& cfg) {
  Json j;
  j["d_fraction"] = cfg.d_fraction;
  j["n_thresholds"] = cfg.n_thresholds;
  j["thin_predictions"] = cfg.thin_predictions;
  return j;
}

BenchmarkConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  BenchmarkConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "d_fraction") {
      cfg.d_fraction = value.get<double>();
    } else if (key == "n_thresholds") {
      cfg.n_thresholds = value.get<int>();
    } else if (key == "thin_predictions") {
      cfg.thin_predictions = value.get<bool>();
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

Json to_json(const PRPoint& point) {
  Json j;
  j["threshold"] = point.threshold;
  j["precision"] = point.precision;
  j["recall"] = point.recall;
  j["f1"] = point.f1;
  return j;
}

Json to_json(const MatchCounts& counts) {
  Json j;
  j["sum_p"] = counts.sum_p;
  j["cnt_p"] = counts.cnt_p;
  j["sum_r"] = counts.sum_r;
  j["cnt_r"] = counts.cnt_r;
  return j;
}

Json to_json(const MetricsReport& report) {
  Json j;
  j["ods"] = report.ods;
  j["ods_threshold"] = report.ods_threshold;
  j["ois"] = report.ois;
  j["ap"] = report.ap;
  Json curve = Json::array();
  for (const auto& p : report.curve) curve.push_back(to_json(p));
  j["curve"] = std::move(curve);
  return j;
}

Json to_json(const CrispnessSweep& sweep) {
  Json j;
  j["factors"] = sweep.factors;
  Json reports = Json::array();
  for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
    Json r;
    r["factor"] = sweep.factors[i];
    r["max_dist_px"] = sweep.max_dist_px[i];
    r["metrics"] = to_json(sweep.reports[i]);
    reports.push_back(std::move(r));
  }
  j["reports"] = std::move(reports);
  return j;
}

Json to_json(const std::vector<MetricGap>& gaps) {
  Json out = Json::array();
  for (const auto& g : gaps) {
    out.push_back({{"factor", g.factor}, {"ods", g.ods}, {"ois", g.ois}, {"ap", g.ap}});
  }
  return out;
}

void write_pr_csv(std::ostream& out, const std::vector<PRPoint>& curve) {
  out << kPrCsvHeader << '\n';
  char line[128];
  for (const auto& p : curve) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", p.threshold, p.precision,
                  p.recall, p.f1);
    out << line;
  }
}

}  // namespace crispbench
