#include "cli_commands.hpp"
#include "cli_config.hpp"

#include "roughlab/estimators.hpp"
#include "roughlab/homogenize.hpp"
#include "roughlab/lifts.hpp"
#include "roughlab/rough_core.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace roughlab;

namespace {

py::dict row_dict(const cli::ResultRow& r) {
  py::dict d;
  d["experiment"] = r.experiment;
  d["params"] = r.params;
  d["quantity"] = r.quantity;
  d["estimate"] = r.estimate;
  d["stderr"] = r.stderr_ ? py::object(py::float_(*r.stderr_)) : py::none();
  d["reference"] = r.reference ? py::object(py::float_(*r.reference)) : py::none();
  d["pass"] = r.pass ? py::object(py::bool_(*r.pass)) : py::none();
  return d;
}

LiftMode parse_mode(const std::string& mode) {
  if (mode == "linear") return LiftMode::piecewise_linear;
  if (mode == "ito") return LiftMode::piecewise_constant_ito;
  throw std::invalid_argument("mode must be 'linear' or 'ito'");
}

py::dict sample_dict(const SlowSample& s) {
  py::dict d;
  d["terminal"] = s.terminal;
  d["path_norms"] = s.path_norms;
  d["verified"] = s.verified;
  d["equivalence_error"] = s.equivalence_error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Level-2 rough paths, fast-slow homogenization and Monte-Carlo estimators";

  py::class_<cli::RunConfig> cfg(m, "RunConfig");
  cfg.def(py::init<>())
      .def("__eq__", [](const cli::RunConfig& a, const cli::RunConfig& b) { return a == b; })
      .def("to_toml", [](const cli::RunConfig& c) { return cli::to_toml(c); })
      .def_static("from_toml", [](const std::string& t) { return cli::from_toml(t); })
      .def("validate", [](const cli::RunConfig& c) { cli::validate(c); })
      .def("hash", [](const cli::RunConfig& c) { return cli::config_hash(c); });
#define RL_FIELD(name) cfg.def_readwrite(#name, &cli::RunConfig::name)
  RL_FIELD(subcommand);
  RL_FIELD(driver);
  RL_FIELD(map_gamma);
  RL_FIELD(observable);
  RL_FIELD(epsilon);
  RL_FIELD(mesh);
  RL_FIELD(friction);
  RL_FIELD(walk_law);
  RL_FIELD(walk_dim);
  RL_FIELD(n);
  RL_FIELD(replicas);
  RL_FIELD(lag_max);
  RL_FIELD(p);
  RL_FIELD(q);
  RL_FIELD(tol);
  RL_FIELD(alpha);
  RL_FIELD(n_list);
  RL_FIELD(tightness_n_list);
  RL_FIELD(tightness_replicas);
  RL_FIELD(b);
  RL_FIELD(drift_rate);
  RL_FIELD(xi);
  RL_FIELD(sde_steps);
  RL_FIELD(calibration_replicas);
  RL_FIELD(cases);
  RL_FIELD(seed);
  RL_FIELD(threads);
  RL_FIELD(output);
  RL_FIELD(manifest);
  RL_FIELD(format);
#undef RL_FIELD

  m.def(
      "run",
      [](const cli::RunConfig& c) {
        cli::validate(c);
        std::vector<cli::ResultRow> rows;
        {
          py::gil_scoped_release release;
          rows = cli::run_subcommand(c);
        }
        py::list out;
        for (const auto& r : rows) out.append(row_dict(r));
        return out;
      },
      py::arg("config"), "Run a subcommand and return its result rows.");

  // Group algebra.
  m.def(
      "group_mul",
      [](const Vector& a, const Matrix& M, const Vector& b, const Matrix& N) {
        const auto z = group_mul({a, M}, {b, N});
        return py::make_tuple(z.a, z.M);
      },
      py::arg("a"), py::arg("M"), py::arg("b"), py::arg("N"));
  m.def(
      "group_inv",
      [](const Vector& a, const Matrix& M) {
        const auto z = group_inv({a, M});
        return py::make_tuple(z.a, z.M);
      },
      py::arg("a"), py::arg("M"));

  py::class_<RoughPathGrid>(m, "RoughPathGrid")
      .def("__len__", &RoughPathGrid::size)
      .def_property_readonly("dim", &RoughPathGrid::dim)
      .def_property_readonly("times", [](const RoughPathGrid& p) {
        return std::vector<double>(p.times().begin(), p.times().end());
      })
      .def("first_level", &RoughPathGrid::first_level)
      .def("increment", [](const RoughPathGrid& p, std::size_t i, std::size_t j) {
        if (i >= p.size() || j >= p.size()) throw py::index_error("grid index out of range");
        const auto z = p.increment(i, j);
        return py::make_tuple(z.a, z.M);
      });

  m.def(
      "lift",
      [](std::vector<double> times, const Matrix& values, const std::string& mode) {
        return lift({std::move(times), values, parse_mode(mode)});
      },
      py::arg("times"), py::arg("values"), py::arg("mode") = "linear",
      "Level-2 lift of sampled values (rows) on the given grid.");
  m.def(
      "brownian_rough_path",
      [](const Matrix& sigma, const Matrix& gamma, std::size_t steps, std::uint64_t seed) {
        return brownian_rough_path(sigma, gamma, steps, seed);
      },
      py::arg("sigma"), py::arg("gamma"), py::arg("steps"), py::arg("seed") = 0);
  m.def("p_var_homog", &p_var_homog, py::arg("path"), py::arg("p"));
  m.def("p_var_inhomog", &p_var_inhomog, py::arg("path"), py::arg("p"));
  m.def("holder_norm", &holder_norm, py::arg("path"), py::arg("alpha"));
  m.def("path_p_variation", &path_p_variation, py::arg("values"), py::arg("p"));

  // Estimators.
  m.def(
      "estimate_batch",
      [](const cli::RunConfig& c) {
        cli::validate(c);
        LimitStatistics s;
        {
          py::gil_scoped_release release;
          s = estimate_batch(cli::make_driver(c), c.n, c.replicas, {c.seed, c.threads});
        }
        py::dict d;
        d["sigma"] = s.sigma_hat;
        d["sigma_stderr"] = s.sigma_stderr;
        d["gamma"] = s.gamma_hat;
        d["gamma_stderr"] = s.gamma_stderr;
        return d;
      },
      py::arg("config"), "Monte-Carlo sigma and gamma for the configured driver.");

  // Fast-slow systems.
  m.def(
      "fast_slow",
      [](const cli::RunConfig& c) {
        cli::validate(c);
        SlowSample s;
        {
          py::gil_scoped_release release;
          const auto fs = cli::make_fast_slow(c);
          s = std::holds_alternative<OUDriver>(fs.driver) ? run_continuous_fast_slow(fs)
                                                          : run_discrete_fast_slow(fs);
        }
        return sample_dict(s);
      },
      py::arg("config"), "Slow variable of the configured fast-slow system.");
  m.def(
      "limit_sde",
      [](const cli::RunConfig& c, const Matrix& sigma, const Matrix& gamma,
         const std::string& mode, std::size_t steps) {
        cli::validate(c);
        if (mode != "ito" && mode != "stratonovich")
          throw std::invalid_argument("mode must be 'ito' or 'stratonovich'");
        LimitSde limit{sigma, gamma, mode == "ito" ? SdeMode::ito : SdeMode::stratonovich,
                       steps > 0 ? steps : cli::effective_sde_steps(c)};
        SlowSample s;
        {
          py::gil_scoped_release release;
          s = run_limit_sde(cli::make_fast_slow(c), limit);
        }
        return sample_dict(s);
      },
      py::arg("config"), py::arg("sigma"), py::arg("gamma"), py::arg("mode") = "ito",
      py::arg("steps") = 0);

  // Tests of fit.
  m.def(
      "ks_two_sample",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = ks_two_sample(a, b);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "ks_test_normal",
      [](const std::vector<double>& x, double sigma, double mean) {
        const auto r = ks_test_normal(x, sigma, mean);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("samples"), py::arg("sigma"), py::arg("mean") = 0.0);

  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_ArithmeticError);
}
