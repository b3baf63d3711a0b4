#include "regulib/closed_loop.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace regulib {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_len(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    std::ostringstream os;
    os << "scenario: " << what << " has length " << v.size() << ", expected " << n;
    throw ArgumentError(os.str());
  }
}

}  // namespace

void validate(const Scenario& s) {
  validate_model(s.plant, s.exo);
  const auto& im = s.immersion;
  const auto& reg = s.regulator;
  if (reg.d != im.d || reg.q_dim != im.q_dim)
    throw ArgumentError("scenario: regulator and immersion dimensions differ");
  if (s.plant.r > 1) {
    if (!s.reduction) throw ArgumentError("scenario: relative degree > 1 needs reduction parameters");
    if (s.reduction->a.size() != s.plant.r - 1)
      throw ArgumentError("scenario: reduction needs r-1 polynomial coefficients");
    validate_reduction(*s.reduction);
  }
  validate_dead_zone(reg, im, s.exo.param_box);

  const auto& ic = s.init;
  require_len(ic.rho, s.exo.p, "rho");
  require_len(ic.w, s.exo.s_dim, "w0");
  require_len(ic.z, s.plant.n, "z0");
  require_len(ic.e, s.plant.r, "e0");
  require_len(ic.xi, im.d, "xi0");
  require_len(ic.theta_hat, im.q_dim, "theta_hat0");
  if (static_cast<std::size_t>(ic.X.rows()) + 1 != im.d ||
      static_cast<std::size_t>(ic.X.cols()) != im.q_dim)
    throw ArgumentError("scenario: X0 must be (d-1) x q");
  if (!box_contains(s.exo.param_box, ic.rho)) throw ArgumentError("scenario: rho outside P");
  if (s.exo.initial_set.contains && !s.exo.initial_set.contains(ic.w))
    throw ArgumentError("scenario: w0 outside the exosystem initial set");
  if (s.plant.z_set.contains && !s.plant.z_set.contains(ic.z))
    throw ArgumentError("scenario: z0 outside the plant initial set");
  if (!s.plant.e_contains(ic.e)) throw ArgumentError("scenario: e0 outside the error box");
  if (!(s.horizon > 0.0) || !std::isfinite(s.horizon))
    throw ArgumentError("scenario: horizon must be positive and finite");
  if (!(s.step > 0.0)) throw ArgumentError("scenario: step must be positive");
  if (!(s.terminal_fraction > 0.0 && s.terminal_fraction <= 1.0))
    throw ArgumentError("scenario: terminal fraction must lie in (0, 1]");
  if (!(s.tol_e > 0.0)) throw ArgumentError("scenario: tol_e must be positive");
  if (!(s.pe_window > 0.0)) throw ArgumentError("scenario: pe_window must be positive");
}

PlantNormalForm effective_plant(const Scenario& s) {
  if (s.plant.r == 1) return s.plant;
  return reduce_plant(s.plant, *s.reduction).plant;
}

ImmersionData effective_immersion(const Scenario& s) {
  if (s.plant.r == 1) return s.immersion;
  return lift_immersion(s.immersion, s.plant.n);
}

void StateLayout::add(std::string name, std::size_t size, std::size_t cols) {
  blocks.push_back({std::move(name), dim, size, cols});
  dim += size;
}

const StateBlock& StateLayout::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw ArgumentError("state layout has no block '" + name + "'");
}

Eigen::Map<const Vector> StateLayout::view(const Eigen::Ref<const Vector>& x,
                                           const std::string& name) const {
  const StateBlock& b = block(name);
  return {x.data() + b.offset, idx(b.size)};
}

std::vector<std::string> StateLayout::labels() const {
  std::vector<std::string> out;
  out.reserve(dim);
  for (const auto& b : blocks) {
    if (b.cols > 0) {
      for (std::size_t i = 0; i < b.size; ++i)
        out.push_back(b.name + "_" + std::to_string(i / b.cols + 1) + "_" +
                      std::to_string(i % b.cols + 1));
      continue;
    }
    for (std::size_t i = 0; i < b.size; ++i) out.push_back(b.name + "_" + std::to_string(i + 1));
  }
  return out;
}

StateLayout closed_loop_layout(const Scenario& s) {
  StateLayout l;
  l.add("rho", s.exo.p);
  l.add("w", s.exo.s_dim);
  l.add("z", s.plant.n);
  l.add("e", s.plant.r);
  l.add("xi", s.immersion.d);
  l.add("theta_hat", s.immersion.q_dim);
  l.add("X", (s.immersion.d - 1) * s.immersion.q_dim, s.immersion.q_dim);
  return l;
}

StateLayout zero_dynamics_layout(const Scenario& s) {
  StateLayout l;
  l.add("rho", s.exo.p);
  l.add("w", s.exo.s_dim);
  l.add("z", s.plant.n + s.plant.r - 1);
  l.add("eta", s.immersion.d);
  l.add("theta_tilde", s.immersion.q_dim);
  l.add("X", (s.immersion.d - 1) * s.immersion.q_dim, s.immersion.q_dim);
  return l;
}

Vector initial_state(const Scenario& s) {
  const RegulatorState reg{s.init.xi, s.init.theta_hat, s.init.X};
  const Vector zeta = reg.pack();
  Vector x(closed_loop_layout(s).dim);
  x << s.init.rho, s.init.w, s.init.z, s.init.e, zeta;
  return x;
}

MeasuredFeedback closed_loop_controller(const Scenario& s) {
  const OutputFeedback fb =
      make_regulator_feedback(s.regulator, effective_immersion(s), s.feedback_sign);
  if (s.plant.r == 1) return as_measured(fb);
  return lift_controller(fb, *s.reduction, s.plant.r);
}

VectorField assemble_closed_loop(const Scenario& s) {
  validate(s);
  const StateLayout layout = closed_loop_layout(s);
  const MeasuredFeedback ctrl = closed_loop_controller(s);
  const auto p = idx(s.exo.p), sd = idx(s.exo.s_dim), n = idx(s.plant.n), r = idx(s.plant.r);
  const auto zeta_dim = idx(ctrl.state_dim);
  auto plant = std::make_shared<const PlantNormalForm>(s.plant);
  auto exo = std::make_shared<const Exosystem>(s.exo);
  VectorField field;
  field.dim = layout.dim;
  field.rhs = [plant, exo, ctrl, p, sd, n, r, zeta_dim](double, const Vector& x) {
    const Vector rho = x.segment(0, p);
    const Vector w = x.segment(p, sd);
    const Vector z = x.segment(p + sd, n);
    const Vector e = x.segment(p + sd + n, r);
    const Vector zeta = x.segment(p + sd + n + r, zeta_dim);
    const double u = ctrl.output(zeta, e);
    Vector dx(x.size());
    dx.segment(0, p).setZero();
    dx.segment(p, sd) = exo->eval(rho, w);
    dx.segment(p + sd, n) = plant->eval_f0(rho, w, z) + plant->eval_f1(rho, w, z, e[0]) * e[0];
    for (Eigen::Index i = 0; i + 1 < r; ++i) dx[p + sd + n + i] = e[i + 1];
    dx[p + sd + n + r - 1] = plant->eval_q(rho, w, z, e) + u;
    dx.segment(p + sd + n + r, zeta_dim) = ctrl.rhs(zeta, e);
    return dx;
  };
  return field;
}

VectorField assemble_reduced_closed_loop(const Scenario& s) {
  if (s.plant.r == 1) return assemble_closed_loop(s);
  validate(s);
  const StateLayout layout = closed_loop_layout(s);
  auto red = std::make_shared<const ReducedPlant>(reduce_plant(s.plant, *s.reduction));
  auto exo = std::make_shared<const Exosystem>(s.exo);
  const OutputFeedback ctrl =
      make_regulator_feedback(s.regulator, effective_immersion(s), s.feedback_sign);
  const auto p = idx(s.exo.p), sd = idx(s.exo.s_dim), nt = idx(red->plant.n);
  const auto zeta_dim = idx(ctrl.state_dim);
  VectorField field;
  field.dim = layout.dim;
  field.rhs = [red, exo, ctrl, p, sd, nt, zeta_dim](double, const Vector& x) {
    const Vector rho = x.segment(0, p);
    const Vector w = x.segment(p, sd);
    const Vector zt = x.segment(p + sd, nt);
    const double et = x[p + sd + nt];
    const Vector zeta = x.segment(p + sd + nt + 1, zeta_dim);
    const double u = ctrl.output(zeta, et);
    Vector dx(x.size());
    dx.segment(0, p).setZero();
    dx.segment(p, sd) = exo->eval(rho, w);
    dx.segment(p + sd, nt) =
        red->plant.eval_f0(rho, w, zt) + red->plant.eval_f1(rho, w, zt, et) * et;
    dx[p + sd + nt] = red->tilde_q(rho, w, zt, et) + u;
    dx.segment(p + sd + nt + 1, zeta_dim) = ctrl.rhs(zeta, et);
    return dx;
  };
  return field;
}

Vector to_reduced_coordinates(const Scenario& s, const Eigen::Ref<const Vector>& x) {
  Vector out = x;
  if (s.plant.r == 1) return out;
  const StateBlock& eb = closed_loop_layout(s).block("e");
  const Vector e = x.segment(idx(eb.offset), idx(eb.size));
  out[idx(eb.offset + eb.size - 1)] = tilde_e(*s.reduction, e);
  return out;
}

VectorField assemble_regulator_zero_dynamics(const Scenario& s) {
  validate(s);
  const StateLayout layout = zero_dynamics_layout(s);
  auto plant = std::make_shared<const PlantNormalForm>(effective_plant(s));
  auto im = std::make_shared<const ImmersionData>(effective_immersion(s));
  auto exo = std::make_shared<const Exosystem>(s.exo);
  const RegulatorParams reg = s.regulator;
  const auto p = idx(s.exo.p), sd = idx(s.exo.s_dim), n = idx(plant->n);
  const auto d = idx(im->d), q = idx(im->q_dim);
  VectorField field;
  field.dim = layout.dim;
  field.rhs = [plant, im, exo, reg, p, sd, n, d, q](double, const Vector& x) {
    const Vector rho = x.segment(0, p);
    const Vector w = x.segment(p, sd);
    const Vector z = x.segment(p + sd, n);
    const Vector eta = x.segment(p + sd + n, d);
    const Vector tt = x.segment(p + sd + n + d, q);
    const Matrix X = Eigen::Map<const Matrix>(x.data() + p + sd + n + d + q, d - 1, q);
    const double eta1 = eta[0];
    const double drive = plant->eval_q(rho, w, z, Vector::Zero(1)) + eta1;
    const Vector th = im->eval_theta(rho);
    const Vector bt = beta(X, eta1, *im);
    const Matrix omega = im->omega_at(eta1);
    Vector dx(x.size());
    dx.segment(0, p).setZero();
    dx.segment(p, sd) = exo->eval(rho, w);
    dx.segment(p + sd, n) = plant->eval_f0(rho, w, z);
    dx.segment(p + sd + n, d) = im->A * eta - reg.K * drive + reg.b * bt.dot(tt) +
                                im->phi_at(eta1) + omega * th;
    dx.segment(p + sd + n + d, q) = -bt * drive - deadzone_vec(tt + th, reg.ell);
    const Matrix dX = reg.F * X + reg.G * omega;
    dx.segment(p + sd + n + d + q, (d - 1) * q) = Eigen::Map<const Vector>(dX.data(), dX.size());
    return dx;
  };
  return field;
}

Metrics compute_metrics(const Trajectory& traj, const StateLayout& layout, const Scenario& s,
                        bool diverged) {
  Metrics m;
  if (traj.empty()) return m;
  const auto times = traj.times();
  for (const auto& b : layout.blocks) {
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
      sup = std::max(sup, traj.state(i).segment(idx(b.offset), idx(b.size)).norm());
    m.sup_norm[b.name] = sup;
  }

  const std::size_t e_col = layout.block("e").offset;
  const double t0 = times.front();
  const double t_window = t0 + (1.0 - s.terminal_fraction) * s.horizon;
  double terminal = -1.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (times[i] >= t_window - 1e-12) terminal = std::max(terminal, std::abs(traj.state(i)[idx(e_col)]));
  m.terminal_e = terminal < 0.0 ? std::numeric_limits<double>::infinity() : terminal;

  if (!diverged && std::abs(traj.back()[idx(e_col)]) <= s.tol_e) {
    std::size_t i = traj.size();
    while (i > 0 && std::abs(traj.state(i - 1)[idx(e_col)]) <= s.tol_e) --i;
    m.settling_time = times[i == traj.size() ? i - 1 : i];
  }

  const StateBlock& th = layout.block("theta_hat");
  const StateBlock& rb = layout.block("rho");
  const Vector last = traj.back();
  const Vector theta = s.immersion.eval_theta(last.segment(idx(rb.offset), idx(rb.size)));
  m.theta_error = (last.segment(idx(th.offset), idx(th.size)) - theta).norm();

  for (std::size_t i = 1; i < traj.size(); ++i) {
    const Vector dz = deadzone_vec(traj.state(i).segment(idx(th.offset), idx(th.size)),
                                   s.regulator.ell);
    if (dz.cwiseAbs().maxCoeff() > 0.0) m.dead_zone_active_time += times[i] - times[i - 1];
  }

  double first = 0.0, second = 0.0;
  const double t_mid = t0 + 0.5 * s.horizon;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double& sup = times[i] <= t_mid ? first : second;
    sup = std::max(sup, traj.state(i).norm());
  }
  m.bounded = !diverged && second <= 1.01 * first;
  m.regulated = !diverged && m.terminal_e <= s.tol_e;
  return m;
}

namespace {

SimResult run(const Scenario& s, const VectorField& field, const Vector& x0) {
  IntegrateOptions opts;
  opts.divergence_bound = s.divergence_bound;
  IntegrationResult res = integrate(field, x0, 0.0, s.horizon, s.step, opts);
  SimResult out;
  out.layout = closed_loop_layout(s);
  out.diverged_at = res.diverged_at;
  out.metrics = compute_metrics(res.trajectory, out.layout, s, res.diverged_at.has_value());
  out.trajectory = std::move(res.trajectory);
  return out;
}

}  // namespace

SimResult simulate(const Scenario& s) {
  return run(s, assemble_closed_loop(s), initial_state(s));
}

SimResult simulate_reduced(const Scenario& s) {
  return run(s, assemble_reduced_closed_loop(s), to_reduced_coordinates(s, initial_state(s)));
}

DiagnosticTrajectory diagnostic_coordinates(const SimResult& sim, const Scenario& s,
                                            std::size_t stride) {
  if (stride == 0) stride = 1;
  const ImmersionData im = effective_immersion(s);
  const StateLayout& l = sim.layout;
  const auto d = im.d, q = im.q_dim;
  const StateBlock& rb = l.block("rho");
  const StateBlock& wb = l.block("w");
  const StateBlock& zb = l.block("z");
  const StateBlock& eb = l.block("e");
  const std::size_t zeta_off = l.block("xi").offset;
  DiagnosticTrajectory out;
  for (std::size_t i = 0; i < sim.trajectory.size(); i += stride) {
    const Vector x = sim.trajectory.state(i);
    const Vector rho = x.segment(idx(rb.offset), idx(rb.size));
    const Vector e = x.segment(idx(eb.offset), idx(eb.size));
    Vector zt(idx(zb.size + eb.size - 1));
    zt << x.segment(idx(zb.offset), idx(zb.size)), e.head(idx(eb.size - 1));
    const double xe = s.plant.r == 1 ? e[0] : tilde_e(*s.reduction, e);
    const RegulatorState reg = RegulatorState::unpack(
        x.segment(idx(zeta_off), idx(RegulatorState::packed_size(d, q))), d, q);
    const Vector theta = im.eval_theta(rho);
    const Vector bt = beta(reg.X, reg.xi[0], im);
    Vector zbold(rho.size() + idx(wb.size) + zt.size());
    zbold << rho, x.segment(idx(wb.offset), idx(wb.size)), zt;
    out.times.push_back(sim.trajectory.time(i));
    out.zbold.push_back(std::move(zbold));
    out.theta_tilde.push_back(reg.theta_hat - theta - bt * xe);
    out.eta.push_back(reg.xi - lift_M(reg.X) * (reg.theta_hat - theta) - s.regulator.K * xe);
    out.X.push_back(reg.X);
  }
  return out;
}

}  // namespace regulib
