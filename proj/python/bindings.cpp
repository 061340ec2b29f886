#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "mfnet/catalog.hpp"
#include "mfnet/driver.hpp"
#include "mfnet/errors.hpp"
#include "mfnet/io.hpp"
#include "mfnet/limits.hpp"
#include "mfnet/metrics.hpp"
#include "mfnet/nsystem.hpp"
#include "mfnet/philox.hpp"
#include "mfnet/prm.hpp"

namespace py = pybind11;
using mfnet::Json;

namespace {

// Models cross the boundary as JSON text; the Python side wraps them in dicts.
mfnet::ModelSpec parse_model(const std::string& text) { return mfnet::model_from_json(Json::parse(text)); }

py::dict simulate(const std::string& model, std::size_t n, std::uint64_t seed, std::size_t grid, double beta) {
  const auto spec = parse_model(model);
  const auto report = mfnet::validate(spec);
  if (!report.ok()) throw mfnet::ValidationError(report.summary());
  mfnet::SimOptions o;
  o.beta = beta;
  auto sys = mfnet::NSystem::init(spec, n, seed, o);
  const auto family = mfnet::make_stream_family(spec, seed, sys.beta());
  std::vector<double> times;
  std::vector<std::vector<double>> mu;
  for (double t : mfnet::uniform_grid(spec.horizon, grid)) {
    sys.run(family, t);
    times.push_back(t);
    mu.push_back(sys.global_empirical());
  }
  py::list paths;
  for (const auto& p : sys.log().nodes) paths.append(py::make_tuple(p.initial, p.jumps));
  py::dict out;
  out["t"] = times;
  out["mu"] = mu;
  out["paths"] = paths;
  out["beta"] = sys.beta();
  return out;
}

py::dict forward_accel(const std::string& model, std::size_t intervals, std::size_t steps) {
  const auto spec = parse_model(model);
  const auto grid = mfnet::uniform_grid(spec.horizon, intervals);
  const auto law = mfnet::forward_equation_accel(spec, mfnet::invariant_map(spec), grid, {steps});
  py::dict out;
  out["t"] = law.grid;
  out["p"] = law.p;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mean-field network simulator core";
  m.attr("__version__") = mfnet::kVersion;

  py::register_exception<mfnet::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<mfnet::BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  // ClosureError derives from NumericalError, so it is registered first.
  auto numerical = py::register_exception<mfnet::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<mfnet::ClosureError>(m, "ClosureError", numerical.ptr());

  m.def("catalog_names", &mfnet::catalog_names);
  m.def("catalog_model", [](const std::string& name) { return mfnet::model_to_json(mfnet::catalog_model(name)).dump(); },
        py::arg("name"));
  m.def(
      "validate",
      [](const std::string& model) {
        std::vector<std::pair<std::string, std::string>> issues;
        for (const auto& i : mfnet::validate(parse_model(model)).issues) issues.emplace_back(i.code, i.message);
        return issues;
      },
      py::arg("model"));
  m.def("simulate", &simulate, py::arg("model"), py::arg("n"), py::arg("seed") = 1, py::arg("grid") = 20,
        py::arg("beta") = std::numeric_limits<double>::quiet_NaN());
  m.def("forward_equation_accel", &forward_accel, py::arg("model"), py::arg("intervals") = 20,
        py::arg("steps") = 2000);
  m.def(
      "invariant_measure",
      [](const std::string& model, std::size_t x, std::size_t xt) {
        return mfnet::invariant_measure(parse_model(model), x, xt);
      },
      py::arg("model"), py::arg("x"), py::arg("x_tilde"));
  m.def(
      "dbl_distance",
      [](const std::vector<double>& p, const std::vector<double>& q, const std::vector<int>& values) {
        return mfnet::dbl_distance(p, q, mfnet::GroundMetric::line(values));
      },
      py::arg("p"), py::arg("q"), py::arg("values"));
  m.def(
      "fit_rate",
      [](const std::vector<double>& xs, const std::vector<double>& errors) {
        const auto fit = mfnet::fit_rate(xs, errors);
        py::dict out;
        out["slope"] = fit.slope;
        out["intercept"] = fit.intercept;
        out["ci_low"] = fit.ci_low;
        out["ci_high"] = fit.ci_high;
        return out;
      },
      py::arg("xs"), py::arg("errors"));
  m.def(
      "philox",
      [](std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) {
        return mfnet::Philox4x32::generate(counter, key);
      },
      py::arg("counter"), py::arg("key"));
  m.def(
      "run_experiment",
      [](const std::string& config, const std::string& base_dir) {
        const auto cfg = mfnet::parse_config(Json::parse(config), "simulate", {}, base_dir);
        py::gil_scoped_release release;
        return mfnet::run_experiment(cfg).dump();
      },
      py::arg("config"), py::arg("base_dir") = ".");
}
