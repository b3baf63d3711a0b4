#include "regulib/scenarios.hpp"

#include "regulib/errors.hpp"

namespace regulib {

namespace {

Exosystem harmonic_exosystem() {
  Exosystem exo;
  exo.p = 1;
  exo.s_dim = 2;
  exo.s = [](const Vector& rho, const Vector& w) {
    Vector dw(2);
    dw << rho[0] * w[1], -rho[0] * w[0];
    return dw;
  };
  exo.param_box = {{0.8, 1.2}};
  exo.initial_set = SampleSet::ball(2, 1.0);
  return exo;
}

PlantNormalForm harmonic_plant(std::size_t r) {
  PlantNormalForm plant;
  plant.n = 1;
  plant.r = r;
  plant.f0 = [](const Vector&, const Vector&, const Vector& z) { return Vector(-z); };
  plant.f1 = [](const Vector&, const Vector&, const Vector&, double) {
    return Vector(Vector::Zero(1));
  };
  plant.q = [](const Vector&, const Vector& w, const Vector& z, const Vector&) {
    return -w[0] + z[0];
  };
  plant.z_set = SampleSet::box({{-2.0, 2.0}});
  plant.e_bound = 1.0;
  return plant;
}

Vector harmonic_tau(const Vector& rho, const Vector& w, const Vector&) {
  Vector t(2);
  t << w[0], rho[0] * w[1];
  return t;
}

ImmersionData harmonic_immersion() {
  return make_immersion(
      2, 1, harmonic_tau, [](const Vector& rho) { return Vector(Vector::Constant(1, rho[0] * rho[0])); },
      [](double) { return Vector(Vector::Zero(2)); },
      [](double y) {
        Matrix m(2, 1);
        m << 0.0, -y;
        return m;
      });
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

InitialConditions harmonic_init(std::size_t r, std::size_t q_dim) {
  InitialConditions ic;
  ic.rho = vec({1.0});
  ic.w = vec({1.0, 0.0});
  ic.z = vec({0.5});
  ic.e = Vector::Zero(static_cast<Eigen::Index>(r));
  ic.e[0] = 0.2;
  ic.xi = Vector::Zero(2);
  ic.theta_hat = Vector::Constant(static_cast<Eigen::Index>(q_dim), 1.04);
  ic.X = Matrix::Zero(1, static_cast<Eigen::Index>(q_dim));
  return ic;
}

Scenario harmonic1() {
  Scenario s;
  s.name = "harmonic1";
  s.exo = harmonic_exosystem();
  s.plant = harmonic_plant(1);
  s.immersion = harmonic_immersion();
  s.regulator = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  s.init = harmonic_init(1, 1);
  return s;
}

Scenario harmonic1_r2() {
  Scenario s = harmonic1();
  s.name = "harmonic1-r2";
  s.plant = harmonic_plant(2);
  s.reduction = ReductionParams{{1.0}, 10.0};
  s.init = harmonic_init(2, 1);
  return s;
}

Scenario no_pe() {
  Scenario s = harmonic1();
  s.name = "no-pe";
  s.immersion = make_immersion(
      2, 2, harmonic_tau,
      [](const Vector& rho) { return Vector(Vector::Constant(2, 0.5 * rho[0] * rho[0])); },
      [](double) { return Vector(Vector::Zero(2)); },
      [](double y) {
        Matrix m(2, 2);
        m << 0.0, 0.0, -y, -y;
        return m;
      });
  s.regulator = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 2);
  s.init = harmonic_init(1, 2);
  s.init.theta_hat = vec({0.2, 0.9});
  return s;
}

Scenario harmonic1_wrong_sign() {
  Scenario s = harmonic1();
  s.name = "harmonic1-wrong-sign";
  s.feedback_sign = -1.0;
  return s;
}

}  // namespace

NamedScenario canonical_harmonic() {
  return {"harmonic1", "harmonic exosystem, relative degree one, theta = rho^2", harmonic1};
}

NamedScenario canonical_harmonic_r2() {
  return {"harmonic1-r2", "harmonic1 with relative degree two and reduction root -1", harmonic1_r2};
}

NamedScenario pe_negative_control() {
  return {"no-pe", "duplicated regressor columns; excitation fails by construction", no_pe};
}

NamedScenario wrong_sign_control() {
  return {"harmonic1-wrong-sign", "harmonic1 with destabilizing feedback v = +k e",
          harmonic1_wrong_sign};
}

const std::vector<NamedScenario>& scenario_registry() {
  static const std::vector<NamedScenario> registry{canonical_harmonic(), canonical_harmonic_r2(),
                                                   pe_negative_control(), wrong_sign_control()};
  return registry;
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& s : scenario_registry()) out.push_back(s.name);
  return out;
}

Scenario build_scenario(const std::string& name) {
  for (const auto& s : scenario_registry())
    if (s.name == name) return s.build();
  std::string known;
  for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown scenario '" + name + "' (known: " + known + ")");
}

}  // namespace regulib
