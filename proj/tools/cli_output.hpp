#pragma once

// Result tables. CSV schema version 1, one row per reported quantity:
//   schema_version, experiment, subcommand, driver, observable, n, replicas,
//   seed, params, quantity, estimate, stderr, reference, pass
// params holds row-specific settings as "key=value" pairs joined by ';'.
// Empty stderr / reference / pass cells mean "not applicable". Numbers use
// the shortest round-trip decimal form, so equal runs give equal bytes.

#include "cli_config.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace roughlab::cli {

inline constexpr int kCsvSchemaVersion = 1;

struct ResultRow {
  std::string experiment;
  std::string params;
  std::string quantity;
  double estimate = 0.0;
  std::optional<double> stderr_;
  std::optional<double> reference;
  std::optional<bool> pass;
};

/// RFC-4180 field quoting: fields containing ',', '"', CR or LF are wrapped
/// in quotes with inner quotes doubled.
std::string csv_field(const std::string& s);
std::string format_number(double x);

void write_csv(std::ostream& os, const RunConfig& cfg, const std::vector<ResultRow>& rows);
nlohmann::json rows_to_json(const RunConfig& cfg, const std::vector<ResultRow>& rows);

struct RunInfo {
  double wall_seconds = 0.0;
  std::string timestamp;  // UTC, ISO 8601
  int exit_code = 0;
  std::size_t threads = 0;
};

nlohmann::json make_manifest(const RunConfig& cfg, const RunInfo& info);

}  // namespace roughlab::cli
