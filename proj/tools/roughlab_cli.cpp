// roughlab command-line tool.
//
// Exit codes: 0 all checks passed, 2 a statistical or algebraic check failed,
// 1 runtime error (including numeric blow-up), 64 invalid usage or config.

#include "cli_commands.hpp"
#include "cli_config.hpp"
#include "cli_output.hpp"

#include "roughlab/parallel.hpp"
#include "roughlab/rde.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using roughlab::cli::RunConfig;

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitUsage = 64;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The subcommand and config path are needed before CLI11 parses, so that file
// values become the option defaults and explicit flags override them.
void prescan(int argc, char** argv, std::string& subcommand, std::string& config_path) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    } else if (subcommand.empty()) {
      for (auto name : roughlab::cli::kSubcommands)
        if (arg == name) subcommand = arg;
    }
  }
}

void add_common(CLI::App& s, RunConfig& cfg, std::string& config_path, bool& dump) {
  s.add_option("--config", config_path, "TOML file; flags given here override it");
  s.add_flag("--dump-config", dump, "Print the effective configuration as TOML and exit");
  s.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  s.add_option("--threads", cfg.threads, "Worker threads (0: $ROUGHLAB_THREADS or all cores)")
      ->capture_default_str();
  s.add_option("--output,-o", cfg.output, "Result table path (default stdout)");
  s.add_option("--manifest", cfg.manifest, "Manifest path (default <output>.manifest.json)");
  s.add_option("--format", cfg.format, "csv or json")->capture_default_str();
}

void add_driver(CLI::App& s, RunConfig& cfg) {
  s.add_option("--driver", cfg.driver, "doubling, lsv, ou or walk")->capture_default_str();
  s.add_option("--map-gamma", cfg.map_gamma, "LSV exponent in [0, 1/2)")->capture_default_str();
  s.add_option("--observable", cfg.observable,
               "centered-id, cos or zero; comma-separated names stack")
      ->capture_default_str();
  s.add_option("--epsilon", cfg.epsilon, "OU scale parameter")->capture_default_str();
  s.add_option("--mesh", cfg.mesh, "OU grid steps per unit slow time")->capture_default_str();
  s.add_option("--friction", cfg.friction, "OU friction matrix, rows ';' entries ','")
      ->capture_default_str();
  s.add_option("--walk-law", cfg.walk_law, "rademacher or gaussian")->capture_default_str();
  s.add_option("--walk-dim", cfg.walk_dim, "Walk dimension")->capture_default_str();
  s.add_option("--n", cfg.n, "Fast steps per unit slow time")->capture_default_str();
  s.add_option("--replicas", cfg.replicas, "Independent replicas")->capture_default_str();
}

void add_slow(CLI::App& s, RunConfig& cfg) {
  s.add_option("--b", cfg.b, "Diffusion: linear (b(x)=x), identity or heisenberg")
      ->capture_default_str();
  s.add_option("--drift-rate", cfg.drift_rate, "Linear drift a(x) = rate x")
      ->capture_default_str();
  s.add_option("--xi", cfg.xi, "Initial value of every slow coordinate")->capture_default_str();
  s.add_option("--sde-steps", cfg.sde_steps, "Limit SDE steps, multiple of 32 (0: automatic)")
      ->capture_default_str();
  s.add_option("--calibration-replicas", cfg.calibration_replicas,
               "Replicas for the sigma/gamma calibration (0: same as --replicas)")
      ->capture_default_str();
  s.add_option("--p", cfg.p, "Exponent of the path-norm functional, in (2, 3)")
      ->capture_default_str();
  s.add_option("--alpha", cfg.alpha, "KS significance level")->capture_default_str();
}

int run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<roughlab::cli::ResultRow> rows;
  try {
    rows = roughlab::cli::run_subcommand(cfg);
  } catch (const roughlab::BlowUpError& e) {
    std::cerr << "roughlab: numeric blow-up at t = " << e.time() << ": " << e.what() << '\n';
    return kExitError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "roughlab: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "roughlab: error: " << e.what() << '\n';
    return kExitError;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int code = kExitPass;
  for (const auto& r : rows)
    if (r.pass && !*r.pass) code = kExitCheckFailed;

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output, std::ios::binary);
    if (!file) {
      std::cerr << "roughlab: cannot write " << cfg.output << '\n';
      return kExitError;
    }
  }
  std::ostream& out = cfg.output.empty() ? std::cout : file;
  if (cfg.format == "json")
    out << roughlab::cli::rows_to_json(cfg, rows).dump(2) << '\n';
  else
    roughlab::cli::write_csv(out, cfg, rows);

  std::string manifest_path = cfg.manifest;
  if (manifest_path.empty() && !cfg.output.empty()) manifest_path = cfg.output + ".manifest.json";
  if (!manifest_path.empty()) {
    roughlab::cli::RunInfo info{wall, utc_timestamp(), code, roughlab::resolve_threads(cfg.threads)};
    std::ofstream mf(manifest_path, std::ios::binary);
    if (!mf) {
      std::cerr << "roughlab: cannot write " << manifest_path << '\n';
      return kExitError;
    }
    mf << roughlab::cli::make_manifest(cfg, info).dump(2) << '\n';
  }
  if (code == kExitCheckFailed) std::cerr << "roughlab: at least one check failed\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string subcommand, config_path;
  prescan(argc, argv, subcommand, config_path);
  if (!config_path.empty()) {
    try {
      cfg = roughlab::cli::load_config_file(config_path, subcommand);
    } catch (const std::exception& e) {
      std::cerr << "roughlab: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  if (!subcommand.empty()) cfg.subcommand = subcommand;

  CLI::App app{"Rough path homogenization experiments for fast-slow systems"};
  app.require_subcommand(1);
  bool dump = false;

  auto* lift_check = app.add_subcommand("lift-check", "Randomized algebraic identity suites");
  add_common(*lift_check, cfg, config_path, dump);
  lift_check->add_option("--cases", cfg.cases, "Random cases per suite")->capture_default_str();

  auto* estimate = app.add_subcommand("estimate", "Estimate the limit covariance and area drift");
  add_common(*estimate, cfg, config_path, dump);
  add_driver(*estimate, cfg);
  estimate->add_option("--lag-max", cfg.lag_max, "Lag-series cutoff (0: automatic)")
      ->capture_default_str();

  auto* moments = app.add_subcommand("moments", "Moment scaling and p-variation tightness");
  add_common(*moments, cfg, config_path, dump);
  add_driver(*moments, cfg);
  moments->add_option("--q", cfg.q, "Moment order, q > 1")->capture_default_str();
  moments->add_option("--tol", cfg.tol, "Slope tolerance")->capture_default_str();
  moments->add_option("--n-list", cfg.n_list, "Scales for moment scaling")->delimiter(',');
  moments->add_option("--tightness-n-list", cfg.tightness_n_list, "Scales for tightness")
      ->delimiter(',');
  moments->add_option("--tightness-replicas", cfg.tightness_replicas,
                      "Replicas for tightness (0 skips it)")
      ->capture_default_str();
  moments->add_option("--p", cfg.p, "p-variation exponent, in (2, 3)")->capture_default_str();

  auto* homogenize =
      app.add_subcommand("homogenize", "Fast-slow system against the calibrated limit SDE");
  add_common(*homogenize, cfg, config_path, dump);
  add_driver(*homogenize, cfg);
  add_slow(*homogenize, cfg);

  auto* ablate = app.add_subcommand("ablate", "Limit SDE with and without the area drift");
  add_common(*ablate, cfg, config_path, dump);
  add_driver(*ablate, cfg);
  add_slow(*ablate, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    roughlab::cli::validate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "roughlab: invalid configuration: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }
  if (dump) {
    std::cout << roughlab::cli::to_toml(cfg);
    return kExitPass;
  }
  return run(cfg);
}
