#pragma once

// Run configuration of the command-line tool: TOML serialization (one flat
// table per subcommand), validation, and translation into library objects.

#include "roughlab/drivers.hpp"
#include "roughlab/homogenize.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace roughlab::cli {

inline constexpr std::string_view kSubcommands[] = {"lift-check", "estimate", "moments",
                                                    "homogenize", "ablate"};

struct RunConfig {
  std::string subcommand = "estimate";

  // Fast driver.
  std::string driver = "doubling";  // doubling | lsv | ou | walk
  double map_gamma = 0.25;          // lsv only
  std::string observable = "centered-id";
  double epsilon = 0.1;      // ou
  std::size_t mesh = 1000;   // ou grid steps per unit slow time
  std::string friction = "1";  // ou, rows separated by ';', entries by ','
  std::string walk_law = "rademacher";
  std::size_t walk_dim = 1;

  // Scales and sample sizes.
  std::size_t n = 10000;
  std::size_t replicas = 1000;
  std::size_t lag_max = 0;  // 0 selects the lag automatically
  double p = 2.5;
  double q = 2.0;
  double tol = 0.1;
  double alpha = 0.01;
  std::vector<std::size_t> n_list{256, 512, 1024, 2048, 4096, 8192, 16384};
  std::vector<std::size_t> tightness_n_list{256, 512, 1024, 2048, 4096};
  std::size_t tightness_replicas = 64;

  // Slow system.
  std::string b = "linear";  // linear | identity | heisenberg
  double drift_rate = 0.0;   // a(x) = drift_rate x
  double xi = 1.0;           // every coordinate of the initial state
  std::size_t sde_steps = 0;             // 0: n for maps and walks, mesh for ou
  std::size_t calibration_replicas = 0;  // 0: same as replicas

  std::size_t cases = 1000;  // lift-check

  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: ROUGHLAB_THREADS or hardware
  std::string output;       // empty: stdout
  std::string manifest;     // empty: <output>.manifest.json when output is set
  std::string format = "csv";

  bool operator==(const RunConfig&) const = default;
};

/// Canonical TOML: a single [subcommand] table holding every field.
std::string to_toml(const RunConfig& cfg);

/// Reads the table named cfg.subcommand (or the only table when
/// subcommand is empty) over the defaults. Unknown keys are errors.
RunConfig from_toml(std::string_view text, const std::string& subcommand = {});
RunConfig load_config_file(const std::string& path, const std::string& subcommand);

/// Throws std::invalid_argument naming the first offending field.
void validate(const RunConfig& cfg);

/// FNV-1a 64 of the canonical TOML, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

Matrix parse_matrix(const std::string& text);
DriverSpec make_driver(const RunConfig& cfg);
VectorFieldBundle make_field(const RunConfig& cfg, std::size_t noise_dim);
FastSlowConfig make_fast_slow(const RunConfig& cfg);

/// Independent seeds derived from cfg.seed for calibration and pilot runs.
std::uint64_t calibration_seed(std::uint64_t seed);
std::uint64_t pilot_seed(std::uint64_t seed);

}  // namespace roughlab::cli
