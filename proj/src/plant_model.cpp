#include "regulib/plant_model.hpp"

#include <cmath>
#include <sstream>

namespace regulib {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw EvaluationError(std::string(what) + " returned a non-finite value");
}

void require_size(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    std::ostringstream os;
    os << what << " returned " << v.size() << " components, expected " << n;
    throw ArgumentError(os.str());
  }
}

}  // namespace

SampleSet SampleSet::box(const Box& box) {
  SampleSet set;
  set.sample = [box](std::mt19937_64& rng) {
    Vector x(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) {
      std::uniform_real_distribution<double> u(box[i].lo, box[i].hi);
      x[static_cast<Eigen::Index>(i)] = box[i].lo == box[i].hi ? box[i].lo : u(rng);
    }
    return x;
  };
  set.contains = [box](const Vector& x) { return box_contains(box, x); };
  return set;
}

SampleSet SampleSet::ball(std::size_t dim, double radius) {
  SampleSet set;
  set.sample = [dim, radius](std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01;
    Vector x(static_cast<Eigen::Index>(dim));
    do {
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = n01(rng);
    } while (x.norm() < 1e-12);
    const double scale = radius * std::pow(u01(rng), 1.0 / static_cast<double>(dim));
    return Vector(scale * x / x.norm());
  };
  set.contains = [dim, radius](const Vector& x) {
    return static_cast<std::size_t>(x.size()) == dim && x.norm() <= radius * (1.0 + 1e-12);
  };
  return set;
}

bool box_contains(const Box& box, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != box.size()) return false;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double v = x[static_cast<Eigen::Index>(i)];
    if (v < box[i].lo || v > box[i].hi) return false;
  }
  return true;
}

Vector Exosystem::eval(const Vector& rho, const Vector& w) const {
  Vector out = s(rho, w);
  require_size(out, s_dim, "exosystem s");
  require_finite(out, "exosystem s");
  return out;
}

Vector PlantNormalForm::eval_f0(const Vector& rho, const Vector& w, const Vector& z) const {
  Vector out = f0(rho, w, z);
  require_size(out, n, "plant f0");
  require_finite(out, "plant f0");
  return out;
}

Vector PlantNormalForm::eval_f1(const Vector& rho, const Vector& w, const Vector& z,
                                double e1) const {
  Vector out = f1(rho, w, z, e1);
  require_size(out, n, "plant f1");
  require_finite(out, "plant f1");
  return out;
}

double PlantNormalForm::eval_q(const Vector& rho, const Vector& w, const Vector& z,
                               const Vector& e) const {
  const double out = q(rho, w, z, e);
  if (!std::isfinite(out)) throw EvaluationError("plant q returned a non-finite value");
  return out;
}

bool PlantNormalForm::e_contains(const Vector& e) const {
  if (static_cast<std::size_t>(e.size()) != r) return false;
  return e.size() == 0 || e.cwiseAbs().maxCoeff() <= e_bound;
}

Vector ImmersionData::eval_tau(const Vector& rho, const Vector& w, const Vector& z) const {
  Vector out = tau(rho, w, z);
  require_size(out, d, "immersion tau");
  require_finite(out, "immersion tau");
  return out;
}

Vector ImmersionData::eval_theta(const Vector& rho) const {
  Vector out = theta(rho);
  require_size(out, q_dim, "immersion theta");
  require_finite(out, "immersion theta");
  return out;
}

Vector ImmersionData::phi_at(double y) const {
  Vector out = phi(clamp_output(y, y_max));
  require_size(out, d, "immersion phi");
  require_finite(out, "immersion phi");
  return out;
}

Matrix ImmersionData::omega_at(double y) const {
  Matrix out = omega(clamp_output(y, y_max));
  if (static_cast<std::size_t>(out.rows()) != d || static_cast<std::size_t>(out.cols()) != q_dim)
    throw ArgumentError("immersion Omega returned a matrix of the wrong shape");
  if (!out.allFinite()) throw EvaluationError("immersion Omega returned a non-finite value");
  return out;
}

Matrix shift_matrix(std::size_t d) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i + 1 < d; ++i)
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
  return a;
}

Matrix first_selector(std::size_t d) {
  Matrix c = Matrix::Zero(1, static_cast<Eigen::Index>(d));
  if (d > 0) c(0, 0) = 1.0;
  return c;
}

ImmersionData make_immersion(std::size_t d, std::size_t q_dim, decltype(ImmersionData::tau) tau,
                             decltype(ImmersionData::theta) theta,
                             decltype(ImmersionData::phi) phi,
                             decltype(ImmersionData::omega) omega, double y_max) {
  if (d < 2) throw ArgumentError("immersion dimension d must be at least 2");
  if (q_dim < 1) throw ArgumentError("immersion parameter dimension must be at least 1");
  if (!(y_max >= 1.0)) throw ArgumentError("immersion y_max must be at least 1");
  ImmersionData im;
  im.d = d;
  im.q_dim = q_dim;
  im.tau = std::move(tau);
  im.theta = std::move(theta);
  im.phi = std::move(phi);
  im.omega = std::move(omega);
  im.A = shift_matrix(d);
  im.C = first_selector(d);
  im.y_max = y_max;
  return im;
}

double clamp_output(double y, double y_max) {
  if (!std::isfinite(y_max)) return y;
  const double knee = y_max - 1.0;
  const double a = std::abs(y);
  if (a <= knee) return y;
  const double s = a - knee;
  const double mag = s >= 2.0 ? y_max : knee + s - 0.25 * s * s;
  return std::copysign(mag, y);
}

Vector AugmentedPoint::pack() const {
  Vector v(rho.size() + w.size() + z.size());
  v << rho, w, z;
  return v;
}

AugmentedPoint AugmentedPoint::unpack(const Eigen::Ref<const Vector>& v, std::size_t p,
                                      std::size_t s_dim, std::size_t n) {
  if (static_cast<std::size_t>(v.size()) < p + s_dim + n)
    throw ArgumentError("augmented point: vector too short");
  const auto ip = static_cast<Eigen::Index>(p);
  const auto is = static_cast<Eigen::Index>(s_dim);
  const auto in = static_cast<Eigen::Index>(n);
  return {v.segment(0, ip), v.segment(ip, is), v.segment(ip + is, in)};
}

void validate_model(const PlantNormalForm& plant, const Exosystem& exo) {
  if (plant.r < 1) throw ArgumentError("plant relative degree must be at least 1");
  if (!plant.f0 || !plant.f1 || !plant.q) throw ArgumentError("plant maps must be set");
  if (!exo.s) throw ArgumentError("exosystem map must be set");
  if (exo.param_box.size() != exo.p)
    throw ArgumentError("exosystem parameter box dimension does not match p");
  for (const auto& iv : exo.param_box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw ArgumentError("exosystem parameter box must be nonempty and bounded");
  }
  if (!(plant.e_bound >= 0.0)) throw ArgumentError("plant error bound must be nonnegative");
}

double friend_control(const PlantNormalForm& plant, const AugmentedPoint& pt) {
  return -plant.eval_q(pt.rho, pt.w, pt.z, Vector::Zero(static_cast<Eigen::Index>(plant.r)));
}

VectorField zero_dynamics_field(const PlantNormalForm& plant, const Exosystem& exo) {
  validate_model(plant, exo);
  const std::size_t p = exo.p;
  const std::size_t s_dim = exo.s_dim;
  const std::size_t n = plant.n;
  VectorField field;
  field.dim = p + s_dim + n;
  field.rhs = [plant, exo, p, s_dim, n](double, const Vector& x) {
    const AugmentedPoint pt = AugmentedPoint::unpack(x, p, s_dim, n);
    Vector dx(x.size());
    dx << Vector::Zero(static_cast<Eigen::Index>(p)), exo.eval(pt.rho, pt.w),
        plant.eval_f0(pt.rho, pt.w, pt.z);
    return dx;
  };
  return field;
}

ImmersionResidual immersion_residual(const ImmersionData& im, const PlantNormalForm& plant,
                                     const Exosystem& exo, const AugmentedPoint& pt,
                                     double fd_step) {
  if (!(fd_step > 0.0)) throw ArgumentError("immersion_residual: fd_step must be positive");
  const VectorField field = zero_dynamics_field(plant, exo);
  const Vector x = pt.pack();
  const Vector dir = field(0.0, x);
  auto tau_at = [&](const Vector& v) {
    const AugmentedPoint q = AugmentedPoint::unpack(v, exo.p, exo.s_dim, plant.n);
    return im.eval_tau(q.rho, q.w, q.z);
  };
  const Vector dtau = (tau_at(x + fd_step * dir) - tau_at(x - fd_step * dir)) / (2.0 * fd_step);
  const Vector tau = im.eval_tau(pt.rho, pt.w, pt.z);
  const double y = (im.C * tau)(0);
  const Vector model = im.A * tau + im.phi_at(y) + im.omega_at(y) * im.eval_theta(pt.rho);
  return {dtau - model, friend_control(plant, pt) - y};
}

AttractorSample attractor_sample(const PlantNormalForm& plant, const Exosystem& exo,
                                 std::size_t n_init, double t_burn, double h, std::uint64_t seed,
                                 double divergence_bound) {
  if (!(t_burn > 0.0)) throw ArgumentError("attractor_sample: t_burn must be positive");
  AttractorSample out;
  if (n_init == 0) return out;
  const VectorField field = zero_dynamics_field(plant, exo);
  const SampleSet rho_set = SampleSet::box(exo.param_box);
  std::mt19937_64 rng(seed);
  IntegrateOptions opts;
  opts.divergence_bound = divergence_bound;
  for (std::size_t i = 0; i < n_init; ++i) {
    AugmentedPoint start{rho_set.sample(rng), exo.initial_set.sample(rng), plant.z_set.sample(rng)};
    const IntegrationResult res = integrate(field, start.pack(), 0.0, t_burn, h, opts);
    if (res.diverged_at) {
      out.violations.push_back(std::move(start));
      continue;
    }
    out.points.push_back(
        AugmentedPoint::unpack(res.trajectory.back(), exo.p, exo.s_dim, plant.n));
  }
  return out;
}

}  // namespace regulib
