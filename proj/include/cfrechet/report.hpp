#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cfrechet/errors.hpp"
#include "cfrechet/linalg.hpp"
#include "cfrechet/version.hpp"

namespace cfrechet {

enum class Metric { MFID, RFID, CFID, JFD, MWD, RWD, RWD3, CWD };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::MFID: return "MFID";
    case Metric::RFID: return "RFID";
    case Metric::CFID: return "CFID";
    case Metric::JFD: return "JFD";
    case Metric::MWD: return "MWD";
    case Metric::RWD: return "RWD";
    case Metric::RWD3: return "RWD3";
    case Metric::CWD: return "CWD";
  }
  throw InputError("unknown metric enum value");
}

/// One named metric value plus the provenance needed to reproduce it:
/// sample count (0 for analytic inputs or support size for discrete
/// instances), dimensions, tolerances, and the seed when randomness was
/// involved. Values within floating-point noise of zero are clamped to 0
/// by the producers, so value >= 0 always holds.
struct MetricReport {
  Metric metric = Metric::MFID;
  double value = 0.0;
  std::int64_t n_samples = 0;
  Eigen::Index dim_x = 0;
  Eigen::Index dim_y = 0;
  double clamp_tol = kDefaultClampTol;
  double pinv_eps = kDefaultPinvEps;
  std::optional<std::uint64_t> seed;
};

inline nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j{
      {"metric", metric_name(r.metric)},
      {"value", r.value},
      {"n", r.n_samples},
      {"dim_x", r.dim_x},
      {"dim_y", r.dim_y},
      {"tolerances", {{"clamp_tol", r.clamp_tol}, {"pinv_eps", r.pinv_eps}}},
      {"tool_version", kToolVersion},
  };
  if (r.seed.has_value()) {
    j["seed"] = *r.seed;
  } else {
    j["seed"] = nullptr;
  }
  return j;
}

inline std::string report_csv_header() {
  return "metric,value,n,dim_x,dim_y,seed,clamp_tol,pinv_eps,tool_version";
}

inline std::string to_csv_row(const MetricReport& r) {
  std::string row = std::string(metric_name(r.metric)) + ",";
  row += nlohmann::json(r.value).dump() + ",";
  row += std::to_string(r.n_samples) + ",";
  row += std::to_string(r.dim_x) + ",";
  row += std::to_string(r.dim_y) + ",";
  row += r.seed.has_value() ? std::to_string(*r.seed) : std::string();
  row += ",";
  row += nlohmann::json(r.clamp_tol).dump() + ",";
  row += nlohmann::json(r.pinv_eps).dump() + ",";
  row += kToolVersion;
  return row;
}

}  // namespace cfrechet
