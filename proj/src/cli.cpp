#include "regulib/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "regulib/analysis.hpp"
#include "regulib/errors.hpp"
#include "regulib/scenarios.hpp"

namespace regulib::cli {

namespace {

constexpr double kBurnIn = 30.0;
constexpr std::size_t kResidualSamples = 100;

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

/// The orbit of the initial (ϱ, w, z) after the zero-dynamics transient.
AugmentedPoint attractor_point(const Scenario& s) {
  return burn_in(effective_plant(s), s.exo, initial_point(s), kBurnIn, s.step);
}

Json mato_json(const Scenario& s) {
  const MatoReport r = verify_mato_transform(s.regulator);
  return {{"similarity_deviation", r.similarity_deviation},
          {"tb_deviation", r.tb_deviation},
          {"ct_deviation", r.ct_deviation},
          {"pass", r.pass},
          {"failures", r.failures}};
}

Json immersion_json(const Scenario& s) {
  const PlantNormalForm plant = effective_plant(s);
  const ImmersionData im = effective_immersion(s);
  const AttractorSample sample =
      attractor_sample(plant, s.exo, kResidualSamples, kBurnIn, s.step, s.seed, s.divergence_bound);
  double ode = 0.0, outres = 0.0;
  for (const auto& pt : sample.points) {
    const ImmersionResidual r = immersion_residual(im, plant, s.exo, pt);
    ode = std::max(ode, r.ode.cwiseAbs().maxCoeff());
    outres = std::max(outres, std::abs(r.out));
  }
  return {{"samples", sample.points.size()},
          {"violations", sample.violations.size()},
          {"max_ode_residual", ode},
          {"max_output_residual", outres},
          {"pass", sample.violations.empty() && ode <= 1e-6 && outres <= 1e-6}};
}

Json sigma_json(const Scenario& s) {
  const AugmentedPoint pt = attractor_point(s);
  const SigmaResult r = sigma_map(pt, effective_plant(s), s.exo, effective_immersion(s),
                                  s.regulator, 0.0, s.step);
  return {{"point", vector_json(pt.pack())},
          {"value", matrix_json(r.value)},
          {"tail_bound", r.tail_bound},
          {"horizon", r.horizon},
          {"backward_diverged", r.backward_diverged}};
}

Json pe_json(const Scenario& s) {
  const PEReport r = pe_gram(attractor_point(s), effective_plant(s), s.exo, effective_immersion(s),
                             s.regulator, s.pe_window, s.step);
  return {{"window", {r.t_start, r.t_end}},
          {"gram", matrix_json(r.gram)},
          {"min_eig", r.min_eig},
          {"threshold", r.threshold},
          {"pass", r.pass}};
}

Json graph_json(const Scenario& s) {
  const GraphInvarianceReport r =
      verify_graph_invariance(attractor_point(s), effective_plant(s), s.exo,
                              effective_immersion(s), s.regulator, 20.0, s.step);
  return {{"invariance_deviation", r.invariance_deviation},
          {"ssnl_deviation", r.ssnl_deviation},
          {"checkpoints", r.checkpoints},
          {"pass", r.pass}};
}

Json limit_set_json(const Scenario& s, const SimResult& sim) {
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 / s.step)));
  const DistanceSeries series = limit_set_distance(sim, s, stride);
  const std::vector<double>& dist = series.distance;
  Json j{{"samples", dist.size()},
         {"initial_distance", dist.empty() ? Json(nullptr) : Json(dist.front())},
         {"final_distance", dist.empty() ? Json(nullptr) : Json(dist.back())}};
  try {
    const DecayFit fit = fit_exponential_decay(dist, series.times);
    j["decay"] = {{"rate", fit.rate}, {"prefactor", fit.prefactor}, {"rmse", fit.rmse},
                  {"samples", fit.samples}};
  } catch (const AnalysisError& e) {
    j["decay"] = {{"error", e.what()}};
  }
  return j;
}

Json lyapunov_json(const Scenario& s) {
  const ImmersionData im = effective_immersion(s);
  const Vector x0 = zero_dynamics_start(s, attractor_point(s), 0.1,
                                        Vector::Constant(static_cast<Eigen::Index>(im.q_dim), 0.5),
                                        s.step);
  const double T = std::min(100.0, s.horizon);
  const Trajectory traj = integrate(assemble_regulator_zero_dynamics(s), x0, 0.0, T, s.step);
  const LyapunovReport r = lyapunov_monitor(traj, s);
  return {{"horizon", T},
          {"V0", r.V.front()},
          {"V_final", r.V.back()},
          {"max_increment", r.max_increment},
          {"on_attractor", r.on_attractor},
          {"warning", r.warning}};
}

Json deadzone_json(const Scenario& s) {
  const ImmersionData& im = s.immersion;
  const double bound = max_theta_norm(im, s.exo.param_box);
  const DeadZoneReport r = deadzone_monitor(s.regulator.ell, im.q_dim, bound, 10000, s.seed);
  return {{"samples", r.samples},
          {"min_inner", r.min_inner},
          {"delta", r.delta},
          {"coercivity_floor", r.coercivity_floor}};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Json header(const Scenario& s) {
  return {{"tool", "regulib"},
          {"version", REGULIB_VERSION},
          {"parameters", parameter_echo(s)},
          {"derived",
           {{"F", matrix_json(s.regulator.F)},
            {"G", matrix_json(s.regulator.G)},
            {"K", vector_json(s.regulator.K)}}}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
}

struct Options {
  std::string scenario;
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string analyses;
  bool analyses_given = false;
  std::string gain;
  std::size_t max_doublings = 0;
  double floor = 0.0;
};

RunConfig resolve(const Options& o, const CLI::App& sub) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.scenario.empty()) cfg.scenario = o.scenario;
  for (const auto& text : o.sets) {
    auto [key, value] = parse_assignment(text);
    const auto& keys = override_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown parameter '" + key + "'");
    cfg.overrides[key] = value;
  }
  if (!o.out.empty()) cfg.out = o.out;
  if (sub.get_name() == "run" && sub.count("--analyses") > 0) cfg.analyses = split_list(o.analyses);
  if (sub.get_name() == "probe") {
    if (sub.count("--gain") > 0) cfg.probe.gain = o.gain;
    if (sub.count("--max-doublings") > 0) cfg.probe.max_doublings = o.max_doublings;
    if (sub.count("--floor") > 0) cfg.probe.floor = o.floor;
  }
  return cfg;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Scenario s = scenario_from_config(cfg);
  const std::vector<std::string> analyses = cfg.analyses.value_or(analysis_names());
  for (const auto& a : analyses) {
    const auto& known = analysis_names();
    if (std::find(known.begin(), known.end(), a) == known.end())
      throw ConfigError("unknown analysis '" + a + "'");
  }
  const SimResult sim = simulate(s);
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  write_csv((dir / "trajectory.csv").string(), sim);
  Json summary = header(s);
  summary["metrics"] = metrics_json(sim);
  if (!analyses.empty()) summary["analyses"] = run_analyses(s, sim, analyses);
  write_json(dir / "summary.json", summary);
  if (sim.diverged_at) {
    err << "regulib: state left the divergence bound at t = " << *sim.diverged_at << '\n';
    return diverged;
  }
  out << "terminal |e| = " << sim.metrics.terminal_e
      << (sim.metrics.regulated ? " (regulated)" : " (not regulated)") << '\n';
  return ok;
}

int cmd_probe(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Scenario s = scenario_from_config(cfg);
  const Gain gain = parse_gain(cfg.probe.gain);
  const ProbeReport rep = small_gain_probe(s, gain, cfg.probe.max_doublings, cfg.probe.floor);
  Json ladder = Json::array();
  for (const auto& t : rep.ladder)
    ladder.push_back({{"gain", t.gain},
                      {"passed", t.passed},
                      {"bounded", t.bounded},
                      {"diverged_at", optional_json(t.diverged_at)},
                      {"terminal_e", t.terminal_e},
                      {"theta_error", t.theta_error}});
  Json j = header(s);
  j["probe"] = {{"gain", gain_name(gain)},
                {"floor", cfg.probe.floor.value_or(default_floor(gain))},
                {"max_doublings", cfg.probe.max_doublings},
                {"ladder", ladder},
                {"passing_gain", optional_json(rep.passing_gain)},
                {"last_divergence_time", optional_json(rep.last_divergence_time)}};
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "probe.json", j);
  if (!rep.passing_gain) {
    err << "regulib: no passing " << gain_name(gain) << " within " << cfg.probe.max_doublings
        << " doublings";
    if (rep.last_divergence_time) err << " (last divergence at t = " << *rep.last_divergence_time << ")";
    err << '\n';
    return probe_exhausted;
  }
  out << "passing " << gain_name(gain) << " = " << *rep.passing_gain << '\n';
  return ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Scenario s = scenario_from_config(cfg);
  Json j = header(s);
  j["checks"] = verify_checks(s);
  std::vector<std::string> failed;
  for (const auto& [name, check] : j["checks"].items())
    if (!check.at("pass").get<bool>()) failed.push_back(name);
  j["failed"] = failed;
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "verify.json", j);
  if (!failed.empty()) {
    err << "regulib: failed checks:";
    for (const auto& f : failed) err << ' ' << f;
    err << '\n';
    return verify_failed;
  }
  out << "all checks passed\n";
  return ok;
}

}  // namespace

const std::vector<std::string>& analysis_names() {
  static const std::vector<std::string> names{"mato", "immersion", "sigma",    "pe",
                                              "graph", "limit_set", "lyapunov", "deadzone"};
  return names;
}

Json run_analyses(const Scenario& s, const SimResult& sim, const std::vector<std::string>& names) {
  Json j = Json::object();
  for (const auto& name : names) {
    if (name == "mato") j[name] = mato_json(s);
    else if (name == "immersion") j[name] = immersion_json(s);
    else if (name == "sigma") j[name] = sigma_json(s);
    else if (name == "pe") j[name] = pe_json(s);
    else if (name == "graph") j[name] = graph_json(s);
    else if (name == "limit_set") j[name] = limit_set_json(s, sim);
    else if (name == "lyapunov") j[name] = lyapunov_json(s);
    else if (name == "deadzone") j[name] = deadzone_json(s);
    else throw ConfigError("unknown analysis '" + name + "'");
  }
  return j;
}

Json metrics_json(const SimResult& sim) {
  const Metrics& m = sim.metrics;
  Json sup = Json::object();
  for (const auto& [k, v] : m.sup_norm) sup[k] = v;
  return {{"terminal_e", m.terminal_e},
          {"settling_time", optional_json(m.settling_time)},
          {"theta_error", m.theta_error},
          {"dead_zone_active_time", m.dead_zone_active_time},
          {"bounded", m.bounded},
          {"regulated", m.regulated},
          {"diverged", sim.diverged_at.has_value()},
          {"diverged_at", optional_json(sim.diverged_at)},
          {"sup_norm", sup}};
}

Json verify_checks(const Scenario& s) {
  return {{"mato", mato_json(s)},
          {"immersion_residual", immersion_json(s)},
          {"pe", pe_json(s)},
          {"graph_invariance", graph_json(s)}};
}

void write_csv(const std::string& path, const SimResult& sim) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot write '" + path + "'");
  std::fputs("t", f);
  for (const auto& label : sim.layout.labels()) std::fprintf(f, ",%s", label.c_str());
  std::fputc('\n', f);
  const Trajectory& tr = sim.trajectory;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    std::fprintf(f, "%.17g", tr.time(i));
    const auto x = tr.state(i);
    for (Eigen::Index c = 0; c < x.size(); ++c) std::fprintf(f, ",%.17g", x[c]);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive internal-model regulator: simulate, probe gains, verify structure"};
  app.set_version_flag("--version", std::string(REGULIB_VERSION));
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "registry key (" +
                    [] {
                      std::string s;
                      for (const auto& n : scenario_names()) s += (s.empty() ? "" : ", ") + n;
                      return s;
                    }() + ")");
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--set", o.sets, "parameter override key=value (repeatable)");
    sub->add_option("--out", o.out, "output directory");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "simulate and write trajectory.csv, summary.json");
  common(run_cmd);
  run_cmd->add_option("--analyses", o.analyses, "comma-separated analyses (empty for none)");
  CLI::App* probe_cmd = app.add_subcommand("probe", "double a gain until the loop regulates");
  common(probe_cmd);
  probe_cmd->add_option("--gain", o.gain, "k, g or lambda");
  probe_cmd->add_option("--max-doublings", o.max_doublings, "ladder length minus one");
  probe_cmd->add_option("--floor", o.floor, "first gain of the ladder");
  CLI::App* verify_cmd = app.add_subcommand("verify", "structural checks, writes verify.json");
  common(verify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run_cmd) return cmd_run(resolve(o, *run_cmd), out, err);
    if (*probe_cmd) return cmd_probe(resolve(o, *probe_cmd), out, err);
    return cmd_verify(resolve(o, *verify_cmd), out, err);
  } catch (const IntegrationError& e) {
    err << "regulib: " << e.what() << '\n';
    return diverged;
  } catch (const Error& e) {
    err << "regulib: " << e.what() << '\n';
    return config_error;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "regulib: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace regulib::cli
