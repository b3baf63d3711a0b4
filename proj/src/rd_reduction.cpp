#include "regulib/rd_reduction.hpp"

#include <cmath>
#include <sstream>

namespace regulib {

namespace {

Matrix companion_of(const std::vector<double>& a) {
  // Monic polynomial λ^m + a_{m-1} λ^{m-1} + ... + a_0.
  const auto m = static_cast<Eigen::Index>(a.size());
  Matrix c = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) c(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < m; ++j) c(m - 1, j) = -a[static_cast<std::size_t>(j)];
  return c;
}

}  // namespace

void validate_reduction(const ReductionParams& params) {
  if (!(params.g > 1.0)) throw SynthesisError("reduction gain g must exceed 1");
  if (params.a.empty()) return;
  for (const auto& ev : eigenvalues(companion_of(params.a))) {
    if (ev.real() >= -1e-10) {
      std::ostringstream os;
      os << "reduction polynomial is not Hurwitz (root " << ev.real() << "+" << ev.imag()
         << "i)";
      throw SynthesisError(os.str());
    }
  }
}

std::vector<double> hurwitz_coeffs(const std::vector<double>& roots) {
  std::vector<double> poly{1.0};  // ascending powers
  for (double root : roots) {
    if (!(root < 0.0)) throw ArgumentError("hurwitz_coeffs: roots must be negative");
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] += poly[k];
      next[k] -= root * poly[k];
    }
    poly = std::move(next);
  }
  poly.pop_back();
  return poly;
}

std::vector<double> chain_weights(const ReductionParams& params) {
  const std::size_t m = params.a.size();
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i)
    w[i] = std::pow(params.g, static_cast<double>(m - i)) * params.a[i];
  return w;
}

double tilde_e(const ReductionParams& params, const Vector& e) {
  if (static_cast<std::size_t>(e.size()) != params.a.size() + 1)
    throw ArgumentError("tilde_e: error vector length must be one more than the coefficient count");
  const std::vector<double> w = chain_weights(params);
  double out = e[e.size() - 1];
  for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * e[static_cast<Eigen::Index>(i)];
  return out;
}

double ReducedPlant::tilde_q(const Vector& rho, const Vector& w, const Vector& z_tilde,
                             double e_tilde) const {
  const Vector e = original_error(z_tilde, e_tilde);
  const Vector z = z_tilde.head(static_cast<Eigen::Index>(original.n));
  // d/dt ẽ = q + u + Σ w_i e_{i+2}.
  double out = original.eval_q(rho, w, z, e);
  const std::vector<double> wts = chain_weights(params);
  for (std::size_t i = 0; i < wts.size(); ++i) out += wts[i] * e[static_cast<Eigen::Index>(i + 1)];
  return out;
}

Vector ReducedPlant::original_error(const Vector& z_tilde, double e_tilde) const {
  const auto n = static_cast<Eigen::Index>(original.n);
  const auto r = static_cast<Eigen::Index>(original.r);
  Vector e(r);
  e.head(r - 1) = z_tilde.segment(n, r - 1);
  const std::vector<double> wts = chain_weights(params);
  double er = e_tilde;
  for (std::size_t i = 0; i < wts.size(); ++i) er -= wts[i] * e[static_cast<Eigen::Index>(i)];
  e[r - 1] = er;
  return e;
}

ReducedPlant reduce_plant(const PlantNormalForm& plant, const ReductionParams& params) {
  if (plant.r < 2) throw ArgumentError("reduce_plant: relative degree must be at least 2");
  if (params.a.size() != plant.r - 1)
    throw ArgumentError("reduce_plant: need r-1 polynomial coefficients");
  validate_reduction(params);

  ReducedPlant red;
  red.original = plant;
  red.params = params;
  double inflation = 1.0;
  for (double w : chain_weights(params)) inflation += w;
  red.tilde_c_bound = inflation * plant.e_bound;

  const auto n = static_cast<Eigen::Index>(plant.n);
  const auto r = static_cast<Eigen::Index>(plant.r);
  const std::vector<double> wts = chain_weights(params);

  PlantNormalForm& out = red.plant;
  out.n = plant.n + plant.r - 1;
  out.r = 1;
  out.e_bound = red.tilde_c_bound;
  out.f0 = [plant, wts, n, r](const Vector& rho, const Vector& w, const Vector& zt) {
    const Vector z = zt.head(n);
    const Vector e = zt.segment(n, r - 1);
    Vector dz(n + r - 1);
    dz.head(n) = plant.eval_f0(rho, w, z) + plant.eval_f1(rho, w, z, e[0]) * e[0];
    for (Eigen::Index i = 0; i + 1 < r - 1; ++i) dz[n + i] = e[i + 1];
    double last = 0.0;
    for (std::size_t i = 0; i < wts.size(); ++i) last -= wts[i] * e[static_cast<Eigen::Index>(i)];
    dz[n + r - 2] = last;
    return dz;
  };
  out.f1 = [n, r](const Vector&, const Vector&, const Vector&, double) {
    Vector unit = Vector::Zero(n + r - 1);
    unit[n + r - 2] = 1.0;
    return unit;
  };
  const ReducedPlant snapshot = red;
  out.q = [snapshot](const Vector& rho, const Vector& w, const Vector& zt, const Vector& et) {
    return snapshot.tilde_q(rho, w, zt, et[0]);
  };
  const SampleSet zs = plant.z_set;
  const double c = plant.e_bound;
  const SampleSet es = SampleSet::box(Box(static_cast<std::size_t>(r - 1), Interval{-c, c}));
  out.z_set.sample = [zs, es](std::mt19937_64& rng) {
    const Vector z = zs.sample(rng);
    const Vector e = es.sample(rng);
    Vector zt(z.size() + e.size());
    zt << z, e;
    return zt;
  };
  out.z_set.contains = [zs, es, n, r](const Vector& zt) {
    return zt.size() == n + r - 1 && zs.contains(zt.head(n)) && es.contains(zt.tail(r - 1));
  };
  return red;
}

ImmersionData lift_immersion(const ImmersionData& im, std::size_t n) {
  ImmersionData out = im;
  const auto in = static_cast<Eigen::Index>(n);
  auto tau = im.tau;
  out.tau = [tau, in](const Vector& rho, const Vector& w, const Vector& zt) {
    return tau(rho, w, zt.head(in));
  };
  return out;
}

MeasuredFeedback lift_controller(const OutputFeedback& controller, const ReductionParams& params,
                                 std::size_t r) {
  if (params.a.size() + 1 != r)
    throw ArgumentError("lift_controller: need r-1 polynomial coefficients");
  MeasuredFeedback lifted;
  lifted.state_dim = controller.state_dim;
  lifted.output_dim = r;
  lifted.rhs = [controller, params](const Vector& zeta, const Vector& y) {
    return controller.rhs(zeta, tilde_e(params, y));
  };
  lifted.output = [controller, params](const Vector& zeta, const Vector& y) {
    return controller.output(zeta, tilde_e(params, y));
  };
  return lifted;
}

MeasuredFeedback as_measured(const OutputFeedback& controller) {
  MeasuredFeedback m;
  m.state_dim = controller.state_dim;
  m.output_dim = 1;
  m.rhs = [controller](const Vector& zeta, const Vector& y) { return controller.rhs(zeta, y[0]); };
  m.output = [controller](const Vector& zeta, const Vector& y) {
    return controller.output(zeta, y[0]);
  };
  return m;
}

}  // namespace regulib
