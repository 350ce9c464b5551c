#pragma once

#include <json.hpp>

#include "crispbench/benchmark.hpp"

namespace crispbench {

using Json = nlohmann::ordered_json;

Json to_json(const BenchmarkConfig& cfg);
Json to_json(const PRPoint& point);
Json to_json(const MatchCounts& counts);
Json to_json(const MetricsReport& report);
Json to_json(const CrispnessSweep& sweep);
Json to_json(const std::vector<MetricGap>& gaps);

/// Strict parse: unknown keys are rejected, missing keys keep defaults.
BenchmarkConfig config_from_json(const Json& j);

}  // namespace crispbench
