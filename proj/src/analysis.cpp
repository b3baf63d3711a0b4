#include "regulib/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <random>
#include <thread>

namespace regulib {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

/// (𝐳, X) with 𝐳̇ = f0(𝐳), Ẋ = F X + G Ω(τ1(𝐳)); X stored row by row.
VectorField filter_field(const PlantNormalForm& plant, const Exosystem& exo,
                         const ImmersionData& im, const RegulatorParams& params) {
  const VectorField zd = zero_dynamics_field(plant, exo);
  const std::size_t p = exo.p, sd = exo.s_dim, n = plant.n;
  const auto zdim = idx(zd.dim);
  const auto rows = idx(im.d - 1), cols = idx(im.q_dim);
  VectorField field;
  field.dim = zd.dim + im.d * im.q_dim - im.q_dim;
  field.rhs = [zd, im, F = params.F, G = params.G, p, sd, n, zdim, rows, cols](double t,
                                                                                 const Vector& x) {
    const Vector zb = x.head(zdim);
    const AugmentedPoint pt = AugmentedPoint::unpack(zb, p, sd, n);
    const double tau1 = (im.C * im.eval_tau(pt.rho, pt.w, pt.z))(0);
    const Matrix X = Eigen::Map<const Matrix>(x.data() + zdim, rows, cols);
    const Matrix dX = F * X + G * im.omega_at(tau1);
    Vector dx(x.size());
    dx << zd(t, zb), Eigen::Map<const Vector>(dX.data(), dX.size());
    return dx;
  };
  return field;
}

Vector pack_with(const Vector& zb, const Matrix& X) {
  Vector v(zb.size() + X.size());
  v << zb, Eigen::Map<const Vector>(X.data(), X.size());
  return v;
}

Matrix unpack_X(const Eigen::Ref<const Vector>& x, Eigen::Index offset, std::size_t d,
                std::size_t q) {
  return Eigen::Map<const Matrix>(x.data() + offset, idx(d - 1), idx(q));
}

double slowest_rate(const Matrix& F) {
  double mu = std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues(F)) mu = std::min(mu, std::abs(ev.real()));
  if (!(mu > 0.0) || !std::isfinite(mu)) throw AnalysisError("filter matrix F is not Hurwitz");
  return mu;
}

double tau1_at(const ImmersionData& im, const AugmentedPoint& pt) {
  return (im.C * im.eval_tau(pt.rho, pt.w, pt.z))(0);
}

}  // namespace

AugmentedPoint initial_point(const Scenario& s) {
  Vector z(idx(s.plant.n + s.plant.r - 1));
  z << s.init.z, s.init.e.head(idx(s.plant.r - 1));
  return {s.init.rho, s.init.w, z};
}

AugmentedPoint burn_in(const PlantNormalForm& plant, const Exosystem& exo, const AugmentedPoint& pt,
                       double t_burn, double h) {
  const Trajectory traj = integrate(zero_dynamics_field(plant, exo), pt.pack(), 0.0, t_burn, h);
  return AugmentedPoint::unpack(traj.back(), exo.p, exo.s_dim, plant.n);
}

SigmaResult sigma_map(const AugmentedPoint& pt, const PlantNormalForm& plant, const Exosystem& exo,
                      const ImmersionData& im, const RegulatorParams& params, double T_sigma,
                      double h, double divergence_bound) {
  if (!(h > 0.0)) throw ArgumentError("sigma_map: step must be positive");
  const double mu = slowest_rate(params.F);
  const VectorField fwd = zero_dynamics_field(plant, exo);
  VectorField bwd;
  bwd.dim = fwd.dim;
  bwd.rhs = [fwd](double t, const Vector& x) { return Vector(-fwd(-t, x)); };
  const double g_norm = params.G.norm();

  double sup_omega = 0.0;
  auto compute = [&](double T) {
    const std::size_t steps = step_count(0.0, T, h);
    const double he = T / static_cast<double>(steps);
    IntegrateOptions opts;
    opts.divergence_bound = divergence_bound;
    const IntegrationResult run = integrate(bwd, pt.pack(), 0.0, T, he, opts);
    const Trajectory& traj = run.trajectory;
    const Matrix E = expm(params.F * he);
    Matrix prop = Matrix::Identity(params.F.rows(), params.F.cols());
    Matrix acc = Matrix::Zero(idx(im.d - 1), idx(im.q_dim));
    sup_omega = 0.0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const AugmentedPoint zj = AugmentedPoint::unpack(traj.state(j), exo.p, exo.s_dim, plant.n);
      const Matrix omega = im.omega_at(tau1_at(im, zj));
      sup_omega = std::max(sup_omega, omega.norm());
      const double weight = (j == 0 || j + 1 == traj.size()) ? 0.5 : 1.0;
      acc += weight * prop * params.G * omega;
      prop = E * prop;
    }
    SigmaResult res;
    res.value = he * acc;
    res.backward_diverged = run.diverged_at.has_value();
    res.horizon = he * static_cast<double>(traj.size() - 1);
    res.tail_bound = g_norm * sup_omega * std::exp(-mu * res.horizon) / mu;
    return res;
  };

  if (T_sigma > 0.0) return compute(T_sigma);
  double T = 12.0 / mu;
  SigmaResult res = compute(T);
  for (int iter = 0; iter < 4 && res.tail_bound > 1e-10 && !res.backward_diverged; ++iter) {
    T = std::log(g_norm * sup_omega / (mu * 1e-10)) / mu + 10.0 * h;
    res = compute(T);
  }
  return res;
}

GraphInvarianceReport verify_graph_invariance(const AugmentedPoint& pt, const PlantNormalForm& plant,
                                              const Exosystem& exo, const ImmersionData& im,
                                              const RegulatorParams& params, double T, double h,
                                              double check_interval, double perturbation,
                                              double tol) {
  const VectorField field = filter_field(plant, exo, im, params);
  const Matrix X0 = sigma_map(pt, plant, exo, im, params, 0.0, h).value;
  const Matrix delta = Matrix::Constant(X0.rows(), X0.cols(), perturbation);
  const Vector zb = pt.pack();
  const Trajectory on_graph = integrate(field, pack_with(zb, X0), 0.0, T, h);
  const Trajectory off_graph = integrate(field, pack_with(zb, X0 + delta), 0.0, T, h);
  const auto zdim = zb.size();
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(check_interval / h)));

  GraphInvarianceReport rep;
  auto check = [&](std::size_t i) {
    const AugmentedPoint zi =
        AugmentedPoint::unpack(on_graph.state(i), exo.p, exo.s_dim, plant.n);
    const Matrix sig = sigma_map(zi, plant, exo, im, params, 0.0, h).value;
    const Matrix Xa = unpack_X(on_graph.state(i), zdim, im.d, im.q_dim);
    const Matrix Xb = unpack_X(off_graph.state(i), zdim, im.d, im.q_dim);
    const Matrix predicted = expm(params.F * on_graph.time(i)) * delta + sig;
    rep.invariance_deviation = std::max(rep.invariance_deviation, max_abs(Xa - sig));
    rep.ssnl_deviation = std::max(rep.ssnl_deviation, max_abs(Xb - predicted));
    ++rep.checkpoints;
  };
  for (std::size_t i = 0; i < on_graph.size(); i += stride) check(i);
  if ((on_graph.size() - 1) % stride != 0) check(on_graph.size() - 1);
  rep.pass = rep.invariance_deviation <= tol && rep.ssnl_deviation <= tol;
  return rep;
}

PEReport pe_gram(const AugmentedPoint& pt, const PlantNormalForm& plant, const Exosystem& exo,
                 const ImmersionData& im, const RegulatorParams& params, double L, double h,
                 double threshold) {
  if (!(L > 0.0)) throw ArgumentError("pe_gram: window length must be positive");
  const Matrix X0 = sigma_map(pt, plant, exo, im, params, 0.0, h).value;
  const std::size_t steps = step_count(0.0, L, h);
  const double he = L / static_cast<double>(steps);
  const Vector zb = pt.pack();
  const Trajectory traj = integrate(filter_field(plant, exo, im, params), pack_with(zb, X0), 0.0,
                                    L, he);
  Matrix gram = Matrix::Zero(idx(im.q_dim), idx(im.q_dim));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const AugmentedPoint zi = AugmentedPoint::unpack(traj.state(i), exo.p, exo.s_dim, plant.n);
    const Matrix X = unpack_X(traj.state(i), zb.size(), im.d, im.q_dim);
    const Vector phi = beta(X, tau1_at(im, zi), im);
    const double weight = (i == 0 || i + 1 == traj.size()) ? 0.5 : 1.0;
    gram += weight * phi * phi.transpose();
  }
  gram *= he;
  gram = (0.5 * (gram + gram.transpose())).eval();

  PEReport rep;
  rep.t_start = 0.0;
  rep.t_end = traj.times().back();
  rep.gram = gram;
  rep.min_eig = eig_min_symmetric(gram);
  rep.threshold = threshold < 0.0 ? 1e-6 * L : threshold;
  rep.pass = rep.min_eig > rep.threshold;
  return rep;
}

LyapunovReport lyapunov_monitor(const Trajectory& zero_dynamics, const Scenario& s) {
  const StateLayout layout = zero_dynamics_layout(s);
  if (zero_dynamics.dim() != layout.dim)
    throw ArgumentError("lyapunov_monitor: trajectory does not match the zero-dynamics layout");
  const PlantNormalForm plant = effective_plant(s);
  const ImmersionData im = effective_immersion(s);
  const RegulatorParams& reg = s.regulator;
  const Matrix P = solve_lyapunov(reg.F);
  const auto d = idx(im.d);
  const Vector b_hat = -reg.b.tail(d - 1);
  const StateBlock& eb = layout.block("eta");
  const StateBlock& tb = layout.block("theta_tilde");

  LyapunovReport rep;
  rep.V.reserve(zero_dynamics.size());
  for (std::size_t i = 0; i < zero_dynamics.size(); ++i) {
    const auto x = zero_dynamics.state(i);
    const AugmentedPoint pt = AugmentedPoint::unpack(x, s.exo.p, s.exo.s_dim, plant.n);
    const Vector chi = x.segment(idx(eb.offset), d) - im.eval_tau(pt.rho, pt.w, pt.z);
    const Vector zeta = b_hat * chi[0] + chi.tail(d - 1);
    const Vector tt = x.segment(idx(tb.offset), idx(tb.size));
    rep.V.push_back(chi[0] * chi[0] + zeta.dot(P * zeta) + tt.squaredNorm());
  }
  rep.max_increment = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rep.V.size(); ++i)
    rep.max_increment = std::max(rep.max_increment, rep.V[i] - rep.V[i - 1]);
  if (rep.V.size() < 2) rep.max_increment = 0.0;

  if (!zero_dynamics.empty()) {
    const AugmentedPoint start =
        AugmentedPoint::unpack(zero_dynamics.state(0), s.exo.p, s.exo.s_dim, plant.n);
    const ImmersionResidual res = immersion_residual(im, plant, s.exo, start);
    rep.on_attractor = res.ode.cwiseAbs().maxCoeff() <= 1e-6 && std::abs(res.out) <= 1e-6;
    if (!rep.on_attractor)
      rep.warning =
          "trajectory does not start on the attractor; V is only bounded up to a residual there";
  }
  return rep;
}

Vector zero_dynamics_start(const Scenario& s, const AugmentedPoint& pt, double chi1,
                           const Vector& theta_tilde, double h) {
  const PlantNormalForm plant = effective_plant(s);
  const ImmersionData im = effective_immersion(s);
  if (static_cast<std::size_t>(theta_tilde.size()) != im.q_dim)
    throw ArgumentError("zero_dynamics_start: theta_tilde has the wrong length");
  const Matrix X = sigma_map(pt, plant, s.exo, im, s.regulator, 0.0, h).value;
  Vector eta = im.eval_tau(pt.rho, pt.w, pt.z);
  eta[0] += chi1;
  const Vector zb = pt.pack();
  Vector x(zb.size() + eta.size() + theta_tilde.size() + X.size());
  x << zb, eta, theta_tilde, Eigen::Map<const Vector>(X.data(), X.size());
  return x;
}

std::vector<double> limit_set_distance(const DiagnosticTrajectory& diag, const PlantNormalForm& plant,
                                       const Exosystem& exo, const ImmersionData& im,
                                       const RegulatorParams& params) {
  std::vector<double> out;
  if (diag.times.empty()) return out;
  out.reserve(diag.times.size());
  const double h0 = diag.times.size() > 1 ? diag.times[1] - diag.times[0] : 1e-3;
  auto point = [&](std::size_t i) { return AugmentedPoint::unpack(diag.zbold[i], exo.p, exo.s_dim, plant.n); };

  Matrix sigma = sigma_map(point(0), plant, exo, im, params, 0.0, h0).value;
  double h_cached = -1.0;
  Matrix E;
  Matrix g_prev;
  for (std::size_t i = 0; i < diag.times.size(); ++i) {
    const AugmentedPoint pt = point(i);
    const Vector tau = im.eval_tau(pt.rho, pt.w, pt.z);
    const Matrix g = params.G * im.omega_at(tau[0]);
    if (i > 0) {
      const double h = diag.times[i] - diag.times[i - 1];
      if (std::abs(h - h_cached) > 1e-12 * std::max(1.0, h)) {
        E = expm(params.F * h);
        h_cached = h;
      }
      sigma = E * sigma + 0.5 * h * (E * g_prev + g);
    }
    g_prev = g;
    const double dist2 = (diag.eta[i] - tau).squaredNorm() + diag.theta_tilde[i].squaredNorm() +
                         (diag.X[i] - sigma).squaredNorm();
    out.push_back(std::sqrt(dist2));
  }
  return out;
}

std::vector<double> limit_set_distance(const DiagnosticTrajectory& diag, const Scenario& s) {
  return limit_set_distance(diag, effective_plant(s), s.exo, effective_immersion(s), s.regulator);
}

DistanceSeries limit_set_distance(const SimResult& sim, const Scenario& s, std::size_t stride) {
  if (stride == 0) stride = 1;
  const DiagnosticTrajectory diag = diagnostic_coordinates(sim, s, 1);
  const std::vector<double> dist = limit_set_distance(diag, s);
  DistanceSeries out;
  for (std::size_t i = 0; i < dist.size(); i += stride) {
    out.times.push_back(diag.times[i]);
    out.distance.push_back(dist[i]);
  }
  return out;
}

DecayFit fit_exponential_decay(const std::vector<double>& distances, const std::vector<double>& times,
                               double skip_fraction) {
  if (distances.size() != times.size())
    throw ArgumentError("fit_exponential_decay: distances and times differ in length");
  if (times.empty()) throw AnalysisError("fit_exponential_decay: no samples");
  const double t_skip = times.front() + skip_fraction * (times.back() - times.front());
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_skip) continue;
    ts.push_back(times[i]);
    ys.push_back(std::log(std::max(distances[i], 1e-14)));
  }
  if (ts.size() < 10) throw AnalysisError("fit_exponential_decay: fewer than 10 usable samples");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
  }
  if (!(stt > 0.0)) throw AnalysisError("fit_exponential_decay: degenerate time samples");
  const double slope = sty / stt;
  const double intercept = my - slope * mt;
  double sse = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (intercept + slope * ts[i]);
    sse += r * r;
  }
  return {-slope, std::exp(intercept), std::sqrt(sse / n), ts.size()};
}

DeadZoneReport deadzone_monitor(double ell, std::size_t q_dim, double theta_bound,
                                std::size_t samples, std::uint64_t seed) {
  if (!(theta_bound < ell)) throw ArgumentError("deadzone_monitor: need |theta| bound below ell");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01;
  const auto q = idx(q_dim);
  DeadZoneReport rep;
  rep.samples = samples;
  rep.delta = std::sqrt(static_cast<double>(q_dim)) * (2.0 * ell + 1.0) + 0.1;
  rep.min_inner = std::numeric_limits<double>::infinity();
  rep.coercivity_floor = std::numeric_limits<double>::infinity();
  const double reach = 2.0 * (ell + 1.0) + theta_bound;
  for (std::size_t i = 0; i < samples; ++i) {
    Vector theta(q), tt(q), dir(q);
    for (Eigen::Index j = 0; j < q; ++j) {
      theta[j] = theta_bound * unit(rng);
      tt[j] = reach * unit(rng);
      dir[j] = n01(rng);
    }
    rep.min_inner = std::min(rep.min_inner, tt.dot(deadzone_vec(tt + theta, ell)));
    if (dir.norm() < 1e-12) continue;
    const Vector far = rep.delta * (1.0 + 9.0 * u01(rng)) * dir / dir.norm();
    const double ratio = 2.0 * far.dot(deadzone_vec(far + theta, ell)) / far.squaredNorm();
    rep.coercivity_floor = std::min(rep.coercivity_floor, ratio);
  }
  return rep;
}

Gain parse_gain(const std::string& name) {
  if (name == "k") return Gain::k;
  if (name == "g") return Gain::g;
  if (name == "lambda") return Gain::lambda;
  throw ArgumentError("unknown gain '" + name + "' (expected k, g or lambda)");
}

std::string gain_name(Gain gain) {
  switch (gain) {
    case Gain::k: return "k";
    case Gain::g: return "g";
    case Gain::lambda: return "lambda";
  }
  return "?";
}

double default_floor(Gain gain) { return gain == Gain::g ? 2.0 : 1.0; }

Scenario with_gain(const Scenario& s, Gain gain, double value) {
  Scenario out = s;
  const RegulatorParams& r = s.regulator;
  switch (gain) {
    case Gain::k:
      out.regulator = make_regulator_params(r.b, r.lambda, value, r.ell, r.q_dim);
      break;
    case Gain::lambda:
      out.regulator = make_regulator_params(r.b, value, r.k, r.ell, r.q_dim);
      break;
    case Gain::g:
      if (!out.reduction) throw ArgumentError("gain g needs a relative-degree reduction");
      out.reduction->g = value;
      validate_reduction(*out.reduction);
      break;
  }
  return out;
}

std::size_t probe_threads() {
  if (const char* env = std::getenv("REGULIB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

ProbeTrial run_trial(const Scenario& tmpl, Gain gain, double value) {
  const SimResult sim = simulate(with_gain(tmpl, gain, value));
  ProbeTrial t;
  t.gain = value;
  t.bounded = sim.metrics.bounded;
  t.diverged_at = sim.diverged_at;
  t.terminal_e = sim.metrics.terminal_e;
  t.theta_error = sim.metrics.theta_error;
  t.passed = sim.metrics.bounded && sim.metrics.regulated;
  return t;
}

}  // namespace

ProbeReport small_gain_probe(const Scenario& tmpl, Gain gain, std::size_t max_doublings,
                             std::optional<double> floor, std::size_t threads) {
  if (max_doublings < 1) throw ArgumentError("small_gain_probe: max_doublings must be at least 1");
  const double base = floor.value_or(default_floor(gain));
  if (!(base > 0.0)) throw ArgumentError("small_gain_probe: floor must be positive");
  validate(with_gain(tmpl, gain, base));
  if (threads == 0) threads = probe_threads();

  ProbeReport rep;
  rep.gain = gain;
  std::vector<double> values;
  for (std::size_t i = 0; i <= max_doublings; ++i) values.push_back(std::ldexp(base, static_cast<int>(i)));

  for (std::size_t start = 0; start < values.size() && !rep.passing_gain; start += threads) {
    const std::size_t stop = std::min(values.size(), start + threads);
    std::vector<ProbeTrial> batch;
    if (threads == 1) {
      batch.push_back(run_trial(tmpl, gain, values[start]));
    } else {
      std::vector<std::future<ProbeTrial>> jobs;
      for (std::size_t i = start; i < stop; ++i)
        jobs.push_back(std::async(std::launch::async, run_trial, std::cref(tmpl), gain, values[i]));
      for (auto& j : jobs) batch.push_back(j.get());
    }
    for (const ProbeTrial& t : batch) {
      rep.ladder.push_back(t);
      if (t.diverged_at) rep.last_divergence_time = t.diverged_at;
      if (t.passed) {
        rep.passing_gain = t.gain;
        break;
      }
    }
  }
  return rep;
}

}  // namespace regulib
