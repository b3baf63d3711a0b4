#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regulib/analysis.hpp"
#include "regulib/cli.hpp"
#include "regulib/config.hpp"
#include "regulib/errors.hpp"
#include "regulib/scenarios.hpp"

namespace py = pybind11;
using namespace regulib;

namespace {

Scenario scenario_with(const std::string& name, const std::string& overrides) {
  return apply_overrides(build_scenario(name), Json::parse(overrides.empty() ? "{}" : overrides));
}

py::dict simulate_py(const std::string& name, const std::string& overrides) {
  const Scenario s = scenario_with(name, overrides);
  SimResult sim;
  {
    py::gil_scoped_release release;
    sim = simulate(s);
  }
  const Trajectory& tr = sim.trajectory;
  py::array_t<double> t(static_cast<py::ssize_t>(tr.size()));
  py::array_t<double> x({static_cast<py::ssize_t>(tr.size()), static_cast<py::ssize_t>(tr.dim())});
  auto tv = t.mutable_unchecked<1>();
  auto xv = x.mutable_unchecked<2>();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    tv(static_cast<py::ssize_t>(i)) = tr.time(i);
    const auto row = tr.state(i);
    for (Eigen::Index j = 0; j < row.size(); ++j) xv(static_cast<py::ssize_t>(i), j) = row[j];
  }
  py::dict out;
  out["t"] = t;
  out["x"] = x;
  out["labels"] = sim.layout.labels();
  out["metrics"] = cli::metrics_json(sim).dump();
  return out;
}

std::string pe_py(const std::string& name, const std::string& overrides, double L) {
  const Scenario s = scenario_with(name, overrides);
  const PlantNormalForm plant = effective_plant(s);
  const AugmentedPoint pt = burn_in(plant, s.exo, initial_point(s), 30.0, s.step);
  const PEReport r = pe_gram(pt, plant, s.exo, effective_immersion(s), s.regulator,
                             L > 0.0 ? L : s.pe_window, s.step);
  Json j{{"min_eig", r.min_eig}, {"threshold", r.threshold}, {"pass", r.pass}};
  j["gram"] = Json::array();
  for (Eigen::Index i = 0; i < r.gram.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < r.gram.cols(); ++c) row.push_back(r.gram(i, c));
    j["gram"].push_back(row);
  }
  return j.dump();
}

Matrix sigma_py(const std::string& name, const Vector& rho, const Vector& w, const Vector& z) {
  const Scenario s = build_scenario(name);
  if (s.plant.r != 1) throw ArgumentError("sigma: scenario must have relative degree one");
  return sigma_map({rho, w, z}, s.plant, s.exo, s.immersion, s.regulator).value;
}

std::string probe_py(const std::string& name, const std::string& gain, std::size_t max_doublings,
                     std::optional<double> floor, const std::string& overrides) {
  const Scenario s = scenario_with(name, overrides);
  ProbeReport r;
  {
    py::gil_scoped_release release;
    r = small_gain_probe(s, parse_gain(gain), max_doublings, floor);
  }
  Json ladder = Json::array();
  for (const auto& t : r.ladder)
    ladder.push_back({{"gain", t.gain}, {"passed", t.passed}, {"terminal_e", t.terminal_e}});
  return Json{{"ladder", ladder},
              {"passing_gain", r.passing_gain ? Json(*r.passing_gain) : Json(nullptr)}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_regulib, m) {
  m.doc() = "Adaptive internal-model regulator core";

  auto base = py::register_exception<Error>(m, "RegulibError", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<SynthesisError>(m, "SynthesisError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<AnalysisError>(m, "AnalysisError", base.ptr());
  py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());

  m.attr("__version__") = REGULIB_VERSION;

  m.def("deadzone", &deadzone_scalar, py::arg("x"), py::arg("ell"));
  m.def("deadzone_vec", &deadzone_vec, py::arg("v"), py::arg("ell"));
  m.def("solve_lyapunov", &solve_lyapunov, py::arg("F"));
  m.def("eig_min_symmetric", &eig_min_symmetric, py::arg("S"));
  m.def(
      "build_fg",
      [](const Vector& b) {
        const FilterMatrices fg = build_fg(b);
        return py::make_tuple(fg.F, fg.G);
      },
      py::arg("b"));
  m.def(
      "gain_K",
      [](const Vector& b, double lambda) {
        return gain_K(b, lambda, shift_matrix(static_cast<std::size_t>(b.size())));
      },
      py::arg("b"), py::arg("lambda_"));
  m.def(
      "verify_mato",
      [](const Vector& b, double lambda) {
        const MatoReport r = verify_mato_transform(make_regulator_params(b, lambda, 1.0, 1.0, 1));
        py::dict d;
        d["similarity_deviation"] = r.similarity_deviation;
        d["tb_deviation"] = r.tb_deviation;
        d["ct_deviation"] = r.ct_deviation;
        d["pass"] = r.pass;
        return d;
      },
      py::arg("b"), py::arg("lambda_"));
  m.def("hurwitz_coeffs", &hurwitz_coeffs, py::arg("roots"));
  m.def(
      "tilde_e",
      [](const std::vector<double>& a, double g, const Vector& e) {
        return tilde_e(ReductionParams{a, g}, e);
      },
      py::arg("a"), py::arg("g"), py::arg("e"));

  m.def("scenario_names", &scenario_names);
  m.def(
      "_scenario_parameters",
      [](const std::string& name, const std::string& overrides) {
        return parameter_echo(scenario_with(name, overrides)).dump();
      },
      py::arg("name"), py::arg("overrides") = "{}");
  m.def("_simulate", &simulate_py, py::arg("name"), py::arg("overrides") = "{}");
  m.def("_pe_gram", &pe_py, py::arg("name"), py::arg("overrides") = "{}", py::arg("L") = 0.0);
  m.def("sigma", &sigma_py, py::arg("name"), py::arg("rho"), py::arg("w"), py::arg("z"));
  m.def("_probe", &probe_py, py::arg("name"), py::arg("gain"), py::arg("max_doublings"),
        py::arg("floor") = std::nullopt, py::arg("overrides") = "{}");
  m.def(
      "_verify",
      [](const std::string& name, const std::string& overrides) {
        return cli::verify_checks(scenario_with(name, overrides)).dump();
      },
      py::arg("name"), py::arg("overrides") = "{}");
}
