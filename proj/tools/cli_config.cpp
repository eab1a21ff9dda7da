#include "cli_config.hpp"

#include "roughlab/rng.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace roughlab::cli {

namespace {

// Every serialized field, in one place so reading and writing stay in step.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  f("driver", c.driver);
  f("map_gamma", c.map_gamma);
  f("observable", c.observable);
  f("epsilon", c.epsilon);
  f("mesh", c.mesh);
  f("friction", c.friction);
  f("walk_law", c.walk_law);
  f("walk_dim", c.walk_dim);
  f("n", c.n);
  f("replicas", c.replicas);
  f("lag_max", c.lag_max);
  f("p", c.p);
  f("q", c.q);
  f("tol", c.tol);
  f("alpha", c.alpha);
  f("n_list", c.n_list);
  f("tightness_n_list", c.tightness_n_list);
  f("tightness_replicas", c.tightness_replicas);
  f("b", c.b);
  f("drift_rate", c.drift_rate);
  f("xi", c.xi);
  f("sde_steps", c.sde_steps);
  f("calibration_replicas", c.calibration_replicas);
  f("cases", c.cases);
  f("seed", c.seed);
  f("threads", c.threads);
  f("output", c.output);
  f("manifest", c.manifest);
  f("format", c.format);
}

constexpr auto kMaxInt = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());

std::uint64_t read_unsigned(const toml::node& node, const std::string& key) {
  const auto v = node.value<std::int64_t>();
  if (!node.is_integer() || !v || *v < 0)
    throw std::invalid_argument("config: " + key + " must be a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

template <class T>
void read_field(const toml::node& node, const std::string& key, T& out) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!node.is_string()) throw std::invalid_argument("config: " + key + " must be a string");
    out = *node.value<std::string>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!node.is_number()) throw std::invalid_argument("config: " + key + " must be a number");
    out = *node.value<double>();
  } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
    const auto* arr = node.as_array();
    if (arr == nullptr) throw std::invalid_argument("config: " + key + " must be an array");
    out.clear();
    for (const auto& item : *arr) out.push_back(static_cast<std::size_t>(read_unsigned(item, key)));
  } else {
    out = static_cast<T>(read_unsigned(node, key));
  }
}

template <class T>
void write_field(toml::table& t, const char* key, const T& value) {
  if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, double>) {
    t.insert(key, value);
  } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
    toml::array arr;
    for (auto v : value) arr.push_back(static_cast<std::int64_t>(v));
    t.insert(key, std::move(arr));
  } else {
    if (static_cast<std::uint64_t>(value) > kMaxInt)
      throw std::invalid_argument(std::string("config: ") + key + " exceeds 2^63 - 1");
    t.insert(key, static_cast<std::int64_t>(value));
  }
}

bool is_subcommand(std::string_view s) {
  return std::find(std::begin(kSubcommands), std::end(kSubcommands), s) != std::end(kSubcommands);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

bool increasing(const std::vector<std::size_t>& v) {
  if (v.size() < 2 || v.front() == 0) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] <= v[i - 1]) return false;
  return true;
}

std::size_t observable_dim(const RunConfig& cfg) {
  if (cfg.driver == "walk") return cfg.walk_dim;
  if (cfg.driver == "ou") return static_cast<std::size_t>(parse_matrix(cfg.friction).rows());
  return named_observable(cfg.observable).dim;
}

}  // namespace

std::string to_toml(const RunConfig& cfg) {
  toml::table body;
  visit_fields(cfg, [&](const char* key, const auto& value) { write_field(body, key, value); });
  toml::table root;
  root.insert(cfg.subcommand, std::move(body));
  std::ostringstream os;
  os << root << '\n';
  return os.str();
}

RunConfig from_toml(std::string_view text, const std::string& subcommand) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " at " << e.source().begin;
    throw std::invalid_argument(os.str());
  }
  RunConfig cfg;
  if (subcommand.empty()) {
    require(root.size() == 1, "config: expected exactly one subcommand table");
    cfg.subcommand = std::string(root.begin()->first.str());
  } else {
    cfg.subcommand = subcommand;
  }
  require(is_subcommand(cfg.subcommand), "config: unknown subcommand '" + cfg.subcommand + "'");
  for (const auto& [key, node] : root)
    require(node.is_table(), "config: top-level key '" + std::string(key.str()) +
                                 "' must be a subcommand table");
  const auto* body = root[cfg.subcommand].as_table();
  if (body == nullptr) return cfg;

  std::vector<std::string> known;
  visit_fields(cfg, [&](const char* key, auto& field) {
    known.emplace_back(key);
    if (const auto* node = body->get(key)) read_field(*node, key, field);
  });
  for (const auto& [key, node] : *body)
    require(std::find(known.begin(), known.end(), key.str()) != known.end(),
            "config: unknown key '" + std::string(key.str()) + "' in [" + cfg.subcommand + "]");
  return cfg;
}

RunConfig load_config_file(const std::string& path, const std::string& subcommand) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_toml(buffer.str(), subcommand);
}

void validate(const RunConfig& cfg) {
  require(is_subcommand(cfg.subcommand), "subcommand: unknown '" + cfg.subcommand + "'");
  require(cfg.format == "csv" || cfg.format == "json", "format: expected csv or json");
  require(cfg.seed <= kMaxInt, "seed: must be at most 2^63 - 1");
  require(cfg.threads <= 4096, "threads: at most 4096");
  if (cfg.subcommand == "lift-check") {
    require(cfg.cases >= 1, "cases: must be positive");
    return;
  }

  const bool is_map = cfg.driver == "doubling" || cfg.driver == "lsv";
  require(is_map || cfg.driver == "ou" || cfg.driver == "walk",
          "driver: expected doubling, lsv, ou or walk");
  if (cfg.driver == "lsv")
    require(cfg.map_gamma >= 0.0 && cfg.map_gamma < 0.5, "map_gamma: must lie in [0, 1/2)");
  if (is_map) {
    try {
      named_observable(cfg.observable);
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string("observable: ") + e.what());
    }
  }
  if (cfg.driver == "walk") {
    require(cfg.walk_law == "rademacher" || cfg.walk_law == "gaussian",
            "walk_law: expected rademacher or gaussian");
    require(cfg.walk_dim >= 1 && cfg.walk_dim <= 64, "walk_dim: must lie in [1, 64]");
  }
  if (cfg.driver == "ou") {
    require(cfg.epsilon > 0.0 && std::isfinite(cfg.epsilon), "epsilon: must be positive");
    require(cfg.mesh >= 1, "mesh: must be positive");
    try {
      validate(std::get<OUDriver>(make_driver(cfg)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string("ou driver: ") + e.what());
    }
  }
  require(cfg.n >= 1, "n: must be positive");
  require(cfg.replicas >= 1, "replicas: must be positive");
  require(cfg.lag_max <= 1u << 20, "lag_max: at most 2^20");
  require(cfg.p > 2.0 && cfg.p < 3.0, "p: must lie in (2, 3)");
  require(cfg.q >= 1.0 && std::isfinite(cfg.q), "q: must be at least 1");
  require(cfg.tol > 0.0 && std::isfinite(cfg.tol), "tol: must be positive");
  require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha: must lie in (0, 1)");

  if (cfg.subcommand == "moments") {
    require(cfg.driver != "ou", "moments: needs a map or walk driver");
    require(cfg.q > 1.0, "q: moment scaling needs q > 1");
    require(increasing(cfg.n_list), "n_list: needs at least two increasing positive entries");
    require(cfg.replicas >= 2, "replicas: moment scaling needs at least 2");
    if (cfg.tightness_replicas > 0) {
      require(increasing(cfg.tightness_n_list),
              "tightness_n_list: needs at least two increasing positive entries");
      require(cfg.tightness_replicas >= 2, "tightness_replicas: 0 or at least 2");
    }
  }
  if (cfg.subcommand == "estimate")
    require(cfg.replicas >= 2, "replicas: estimators need at least 2");

  if (cfg.subcommand == "homogenize" || cfg.subcommand == "ablate") {
    require(cfg.replicas >= 1000, "replicas: law comparison needs at least 1000");
    require(cfg.calibration_replicas == 0 || cfg.calibration_replicas >= 2,
            "calibration_replicas: 0 or at least 2");
    require(std::isfinite(cfg.xi), "xi: must be finite");
    require(std::isfinite(cfg.drift_rate), "drift_rate: must be finite");
    require(cfg.sde_steps % 32 == 0, "sde_steps: must be a multiple of 32");
    const std::size_t m = observable_dim(cfg);
    if (cfg.b == "linear")
      require(m == 1, "b: linear needs a one-dimensional driver");
    else if (cfg.b == "heisenberg")
      require(m == 2, "b: heisenberg needs a two-dimensional driver");
    else
      require(cfg.b == "identity", "b: expected linear, identity or heisenberg");
  }
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_toml(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::vector<double> values;
    std::stringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used > 0 && cell.find_first_not_of(" \t", used) == std::string::npos,
              "matrix: cannot parse '" + cell + "'");
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  require(!rows.empty(), "matrix: empty");
  const std::size_t n = rows.size();
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    require(rows[i].size() == n, "matrix: must be square");
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

DriverSpec make_driver(const RunConfig& cfg) {
  if (cfg.driver == "ou") return OUDriver{parse_matrix(cfg.friction), cfg.epsilon, cfg.mesh};
  if (cfg.driver == "walk") {
    const auto law = cfg.walk_law == "gaussian" ? WalkLaw::gaussian : WalkLaw::rademacher;
    const auto dim = static_cast<Eigen::Index>(cfg.walk_dim);
    return WalkDriver{law, cfg.walk_dim, Matrix::Identity(dim, dim)};
  }
  const Observable v = named_observable(cfg.observable);
  if (cfg.driver == "lsv") {
    const MapDriver map{MapKind::lsv, cfg.map_gamma, 1000};
    // Builtins are centred for Lebesgue measure, which LSV does not preserve.
    return MapSource{map, center_observable(v, map, pilot_seed(cfg.seed), 64,
                                            std::size_t{1} << 18, cfg.threads)};
  }
  return MapSource{MapDriver{MapKind::doubling, 0.0, 1000}, v};
}

VectorFieldBundle make_field(const RunConfig& cfg, std::size_t m) {
  VectorFieldBundle f;
  if (cfg.b == "linear") {
    f = scalar_linear_field(cfg.drift_rate, 1.0);
  } else if (cfg.b == "heisenberg") {
    f = heisenberg_field();
  } else {
    f.dim_state = m;
    f.dim_noise = m;
    f.diffusion = [m](std::span<const double>, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t k = 0; k < m; ++k) out[k * m + k] = 1.0;
    };
    f.diffusion_jacobian = [](std::span<const double>, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
    };
  }
  if (cfg.b != "linear") {
    const double rate = cfg.drift_rate;
    if (rate != 0.0)
      f.drift = [rate](std::span<const double> y, std::span<double> out) {
        for (std::size_t k = 0; k < y.size(); ++k) out[k] = rate * y[k];
      };
    else
      f.drift = nullptr;
  }
  return f;
}

FastSlowConfig make_fast_slow(const RunConfig& cfg) {
  FastSlowConfig fs;
  fs.driver = make_driver(cfg);
  fs.field = make_field(cfg, driver_dim(fs.driver));
  fs.n = cfg.n;
  fs.xi = Vector::Constant(static_cast<Eigen::Index>(fs.field.dim_state), cfg.xi);
  fs.replicas = cfg.replicas;
  fs.seed = cfg.seed;
  fs.threads = cfg.threads;
  fs.pvar_p = cfg.p;
  return fs;
}

std::uint64_t calibration_seed(std::uint64_t seed) {
  return stream_key(seed, 0, StreamPurpose::calibration);
}

std::uint64_t pilot_seed(std::uint64_t seed) { return stream_key(seed, 0, StreamPurpose::pilot); }

}  // namespace roughlab::cli
