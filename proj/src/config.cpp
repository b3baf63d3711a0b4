#include "regulib/config.hpp"

#include <algorithm>
#include <fstream>

#include "regulib/errors.hpp"
#include "regulib/rd_reduction.hpp"
#include "regulib/scenarios.hpp"

namespace regulib {

namespace {

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

double as_number(const std::string& key, const Json& v) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

Vector as_vector(const std::string& key, const Json& v) {
  if (v.is_number()) return Vector::Constant(1, v.get<double>());
  if (!v.is_array()) throw ConfigError("'" + key + "' must be a number or an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_number(key, v[i]);
  return out;
}

Matrix as_matrix(const std::string& key, const Json& v) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) throw ConfigError("'" + key + "' must be an array of rows");
  if (!v[0].is_array()) {
    const Vector row = as_vector(key, v);
    return Matrix(row.transpose());
  }
  const std::size_t cols = v[0].size();
  Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) throw ConfigError("'" + key + "' rows differ in length");
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = as_number(key, v[i][j]);
  }
  return out;
}

std::vector<double> as_list(const std::string& key, const Json& v) {
  const Vector x = as_vector(key, v);
  return {x.data(), x.data() + x.size()};
}

void check_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

const std::vector<std::string>& override_keys() {
  static const std::vector<std::string> keys{
      "k",      "lambda",  "ell",        "b",     "g",     "reduction_a", "reduction_roots",
      "T",      "h",       "seed",       "rho",   "w0",    "z0",          "e0",
      "xi0",    "theta_hat0", "X0",      "tol_e", "terminal_fraction", "divergence_bound",
      "feedback_sign", "pe_window"};
  return keys;
}

RunConfig parse_config(const Json& doc) {
  check_keys(doc, {"scenario", "set", "out", "analyses", "probe"}, "config");
  RunConfig cfg;
  try {
    if (doc.contains("scenario")) cfg.scenario = doc.at("scenario").get<std::string>();
    if (doc.contains("set")) {
      check_keys(doc.at("set"), override_keys(), "set");
      cfg.overrides = doc.at("set");
    }
    if (doc.contains("out")) cfg.out = doc.at("out").get<std::string>();
    if (doc.contains("analyses")) cfg.analyses = doc.at("analyses").get<std::vector<std::string>>();
    if (doc.contains("probe")) {
      const Json& p = doc.at("probe");
      check_keys(p, {"gain", "max_doublings", "floor"}, "probe");
      if (p.contains("gain")) cfg.probe.gain = p.at("gain").get<std::string>();
      if (p.contains("max_doublings")) cfg.probe.max_doublings = p.at("max_doublings").get<std::size_t>();
      if (p.contains("floor")) cfg.probe.floor = as_number("floor", p.at("floor"));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

std::pair<std::string, Json> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
  const std::string key = text.substr(0, eq);
  const std::string raw = text.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  return {key, value};
}

Scenario apply_overrides(Scenario s, const Json& overrides) {
  check_keys(overrides, override_keys(), "overrides");
  RegulatorParams& reg = s.regulator;
  Vector b = reg.b;
  double lambda = reg.lambda, k = reg.k, ell = reg.ell;
  for (const auto& [key, v] : overrides.items()) {
    if (key == "k") k = as_number(key, v);
    else if (key == "lambda") lambda = as_number(key, v);
    else if (key == "ell") ell = as_number(key, v);
    else if (key == "b") b = as_vector(key, v);
    else if (key == "g" || key == "reduction_a" || key == "reduction_roots") {
      if (!s.reduction) throw ConfigError("'" + key + "' needs a scenario with relative degree > 1");
      if (key == "g") s.reduction->g = as_number(key, v);
      else if (key == "reduction_a") s.reduction->a = as_list(key, v);
      else s.reduction->a = hurwitz_coeffs(as_list(key, v));
    }
    else if (key == "T") s.horizon = as_number(key, v);
    else if (key == "h") s.step = as_number(key, v);
    else if (key == "seed") {
      if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("'seed' must be a non-negative integer");
      s.seed = v.get<std::uint64_t>();
    }
    else if (key == "rho") s.init.rho = as_vector(key, v);
    else if (key == "w0") s.init.w = as_vector(key, v);
    else if (key == "z0") s.init.z = as_vector(key, v);
    else if (key == "e0") s.init.e = as_vector(key, v);
    else if (key == "xi0") s.init.xi = as_vector(key, v);
    else if (key == "theta_hat0") s.init.theta_hat = as_vector(key, v);
    else if (key == "X0") s.init.X = as_matrix(key, v);
    else if (key == "tol_e") s.tol_e = as_number(key, v);
    else if (key == "terminal_fraction") s.terminal_fraction = as_number(key, v);
    else if (key == "divergence_bound") s.divergence_bound = as_number(key, v);
    else if (key == "feedback_sign") s.feedback_sign = as_number(key, v);
    else if (key == "pe_window") s.pe_window = as_number(key, v);
  }
  reg = make_regulator_params(b, lambda, k, ell, s.immersion.q_dim);
  validate(s);
  return s;
}

Json parameter_echo(const Scenario& s) {
  Json j;
  j["scenario"] = s.name;
  j["k"] = s.regulator.k;
  j["lambda"] = s.regulator.lambda;
  j["ell"] = s.regulator.ell;
  j["b"] = to_json(s.regulator.b);
  if (s.reduction) {
    j["g"] = s.reduction->g;
    j["reduction_a"] = s.reduction->a;
  }
  j["T"] = s.horizon;
  j["h"] = s.step;
  j["seed"] = s.seed;
  j["rho"] = to_json(s.init.rho);
  j["w0"] = to_json(s.init.w);
  j["z0"] = to_json(s.init.z);
  j["e0"] = to_json(s.init.e);
  j["xi0"] = to_json(s.init.xi);
  j["theta_hat0"] = to_json(s.init.theta_hat);
  j["X0"] = to_json(s.init.X);
  j["tol_e"] = s.tol_e;
  j["terminal_fraction"] = s.terminal_fraction;
  j["divergence_bound"] = s.divergence_bound;
  j["feedback_sign"] = s.feedback_sign;
  j["pe_window"] = s.pe_window;
  return j;
}

Scenario scenario_from_parameters(const Json& echo) {
  if (!echo.is_object() || !echo.contains("scenario") || !echo.at("scenario").is_string())
    throw ConfigError("parameter echo needs a 'scenario' name");
  Json rest = echo;
  rest.erase("scenario");
  return apply_overrides(build_scenario(echo.at("scenario").get<std::string>()), rest);
}

Scenario scenario_from_config(const RunConfig& cfg) {
  return apply_overrides(build_scenario(cfg.scenario), cfg.overrides);
}

}  // namespace regulib
