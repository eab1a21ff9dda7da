#include "cli_output.hpp"

#include <Eigen/Core>

#include <array>
#include <charconv>
#include <cmath>

#ifndef ROUGHLAB_VERSION
#define ROUGHLAB_VERSION "unknown"
#endif

namespace roughlab::cli {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

namespace {

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : ""; }

std::string opt_bool(const std::optional<bool>& x) {
  if (!x) return "";
  return *x ? "true" : "false";
}

nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

}  // namespace

void write_csv(std::ostream& os, const RunConfig& cfg, const std::vector<ResultRow>& rows) {
  os << "schema_version,experiment,subcommand,driver,observable,n,replicas,seed,params,"
        "quantity,estimate,stderr,reference,pass\r\n";
  for (const auto& r : rows) {
    os << kCsvSchemaVersion << ',' << csv_field(r.experiment) << ',' << csv_field(cfg.subcommand)
       << ',' << csv_field(cfg.driver) << ',' << csv_field(cfg.observable) << ',' << cfg.n << ','
       << cfg.replicas << ',' << cfg.seed << ',' << csv_field(r.params) << ','
       << csv_field(r.quantity) << ',' << format_number(r.estimate) << ','
       << opt_number(r.stderr_) << ',' << opt_number(r.reference) << ',' << opt_bool(r.pass)
       << "\r\n";
  }
}

nlohmann::json rows_to_json(const RunConfig& cfg, const std::vector<ResultRow>& rows) {
  nlohmann::json out;
  out["schema_version"] = kCsvSchemaVersion;
  out["subcommand"] = cfg.subcommand;
  out["driver"] = cfg.driver;
  out["observable"] = cfg.observable;
  out["n"] = cfg.n;
  out["replicas"] = cfg.replicas;
  out["seed"] = cfg.seed;
  auto& list = out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["experiment"] = r.experiment;
    j["params"] = r.params;
    j["quantity"] = r.quantity;
    j["estimate"] = json_number(r.estimate);
    j["stderr"] = r.stderr_ ? json_number(*r.stderr_) : nlohmann::json();
    j["reference"] = r.reference ? json_number(*r.reference) : nlohmann::json();
    j["pass"] = r.pass ? nlohmann::json(*r.pass) : nlohmann::json();
    list.push_back(std::move(j));
  }
  return out;
}

nlohmann::json make_manifest(const RunConfig& cfg, const RunInfo& info) {
  nlohmann::json m;
  m["tool"] = "roughlab";
  m["csv_schema_version"] = kCsvSchemaVersion;
  m["config_hash"] = config_hash(cfg);
  m["config"] = to_toml(cfg);
  m["seed"] = cfg.seed;
  m["subcommand"] = cfg.subcommand;
  m["threads"] = info.threads;
  m["exit_code"] = info.exit_code;
  m["wall_time_seconds"] = info.wall_seconds;
  m["timestamp"] = info.timestamp;
  m["versions"] = {
      {"roughlab", ROUGHLAB_VERSION},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__},
      {"cxx_standard", __cplusplus},
  };
  return m;
}

}  // namespace roughlab::cli
