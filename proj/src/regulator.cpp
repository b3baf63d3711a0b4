#include "regulib/regulator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace regulib {

namespace {

std::string format_roots(const std::vector<std::complex<double>>& roots) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (i) os << ", ";
    os << roots[i].real();
    if (roots[i].imag() != 0.0) os << (roots[i].imag() > 0 ? "+" : "") << roots[i].imag() << "i";
  }
  os << "}";
  return os.str();
}

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

FilterMatrices build_fg(const Vector& b) {
  if (b.size() < 2) throw ArgumentError("build_fg: b must have at least two entries");
  if (b[0] != 1.0) throw ArgumentError("build_fg: b1 must equal 1");
  const Eigen::Index m = b.size() - 1;
  FilterMatrices fg;
  fg.F = Matrix::Zero(m, m);
  fg.G = Matrix::Zero(m, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    fg.F(i, 0) = -b[i + 1];
    fg.G(i, 0) = -b[i + 1];
    if (i + 1 < m) fg.F(i, i + 1) = 1.0;
    fg.G(i, i + 1) = 1.0;
  }
  const auto roots = eigenvalues(fg.F);
  bool ok = std::all_of(roots.begin(), roots.end(),
                        [](const std::complex<double>& r) { return r.real() < -1e-10; });
  for (std::size_t i = 0; ok && i < roots.size(); ++i)
    for (std::size_t j = i + 1; ok && j < roots.size(); ++j)
      if (std::abs(roots[i] - roots[j]) <= 1e-6) ok = false;
  if (!ok)
    throw SynthesisError("build_fg: filter polynomial must have distinct Hurwitz roots, got " +
                         format_roots(roots));
  return fg;
}

Vector b_from_roots(const std::vector<double>& roots) {
  std::vector<double> poly{1.0};  // ascending powers
  for (double root : roots) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] += poly[k];
      next[k] -= root * poly[k];
    }
    poly = std::move(next);
  }
  Vector b(idx(poly.size()));
  for (std::size_t i = 0; i < poly.size(); ++i) b[idx(i)] = poly[poly.size() - 1 - i];
  return b;
}

Vector gain_K(const Vector& b, double lambda, const Matrix& A) {
  if (!(lambda > 0.0)) throw ArgumentError("gain_K: lambda must be positive");
  if (A.rows() != b.size() || A.cols() != b.size())
    throw ArgumentError("gain_K: A and b have inconsistent shapes");
  return A * b + lambda * b;
}

RegulatorParams make_regulator_params(const Vector& b, double lambda, double k, double ell,
                                      std::size_t q_dim) {
  if (!(lambda > 0.0)) throw ArgumentError("regulator: lambda must be positive");
  if (!(k >= 0.0) || !std::isfinite(k)) throw ArgumentError("regulator: k must be nonnegative");
  if (!(ell > 0.0)) throw ArgumentError("regulator: dead-zone amplitude must be positive");
  if (q_dim < 1) throw ArgumentError("regulator: q_dim must be at least 1");
  RegulatorParams p;
  p.b = b;
  p.lambda = lambda;
  p.k = k;
  p.ell = ell;
  p.d = static_cast<std::size_t>(b.size());
  p.q_dim = q_dim;
  FilterMatrices fg = build_fg(b);
  p.F = std::move(fg.F);
  p.G = std::move(fg.G);
  p.K = gain_K(b, lambda, shift_matrix(p.d));
  return p;
}

double max_theta_norm(const ImmersionData& im, const Box& box, std::size_t points_per_axis) {
  if (points_per_axis < 2) points_per_axis = 2;
  const std::size_t p = box.size();
  std::vector<std::size_t> counter(p, 0);
  double best = 0.0;
  while (true) {
    Vector rho(idx(p));
    for (std::size_t i = 0; i < p; ++i) {
      const double frac = static_cast<double>(counter[i]) / static_cast<double>(points_per_axis - 1);
      rho[idx(i)] = box[i].lo + frac * (box[i].hi - box[i].lo);
    }
    const Vector th = im.eval_theta(rho);
    if (th.size() > 0) best = std::max(best, th.cwiseAbs().maxCoeff());
    std::size_t axis = 0;
    while (axis < p && ++counter[axis] == points_per_axis) counter[axis++] = 0;
    if (axis == p) break;
  }
  return best;
}

double default_dead_zone(const ImmersionData& im, const Box& box) {
  return 1.05 * max_theta_norm(im, box);
}

void validate_dead_zone(const RegulatorParams& params, const ImmersionData& im, const Box& box) {
  const double bound = max_theta_norm(im, box);
  if (!(params.ell > bound)) {
    std::ostringstream os;
    os << "dead-zone amplitude " << params.ell << " does not exceed max |theta| = " << bound;
    throw SynthesisError(os.str());
  }
}

Matrix lift_M(const Matrix& X) {
  Matrix m = Matrix::Zero(X.rows() + 1, X.cols());
  m.bottomRows(X.rows()) = X;
  return m;
}

Vector beta(const Matrix& X, double xi1, const ImmersionData& im) {
  if (static_cast<std::size_t>(X.rows()) + 1 != im.d ||
      static_cast<std::size_t>(X.cols()) != im.q_dim)
    throw ArgumentError("beta: X must be (d-1) x q");
  const Matrix row = im.C * im.A * lift_M(X) + im.C * im.omega_at(xi1);
  return row.transpose();
}

Vector bigH(const Matrix& X, double xi1, const RegulatorParams& params, const ImmersionData& im) {
  return lift_M(X) * beta(X, xi1, im) + params.K;
}

double deadzone_scalar(double x, double ell) {
  const double a = std::abs(x);
  if (a <= ell) return 0.0;
  if (a >= ell + 1.0) return x;
  const double s = a - ell;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return std::copysign((3.0 * s2 - 2.0 * s3) * (ell + 1.0) + s3 - s2, x);
}

Vector deadzone_vec(const Vector& v, double ell) {
  return v.unaryExpr([ell](double x) { return deadzone_scalar(x, ell); });
}

Vector RegulatorState::pack() const {
  Vector v(xi.size() + theta_hat.size() + X.size());
  v << xi, theta_hat, Eigen::Map<const Vector>(X.data(), X.size());
  return v;
}

RegulatorState RegulatorState::unpack(const Eigen::Ref<const Vector>& v, std::size_t d,
                                      std::size_t q_dim) {
  if (static_cast<std::size_t>(v.size()) != packed_size(d, q_dim))
    throw ArgumentError("regulator state: wrong packed length");
  RegulatorState s;
  s.xi = v.segment(0, idx(d));
  s.theta_hat = v.segment(idx(d), idx(q_dim));
  s.X = Eigen::Map<const Matrix>(v.data() + d + q_dim, idx(d - 1), idx(q_dim));
  return s;
}

RegulatorState regulator_rhs(const RegulatorState& state, double v, const RegulatorParams& params,
                             const ImmersionData& im) {
  const double xi1 = state.xi[0];
  const Matrix omega = im.omega_at(xi1);
  const Vector dz = deadzone_vec(state.theta_hat, params.ell);
  const Vector bt = beta(state.X, xi1, im);
  const Vector H = lift_M(state.X) * bt + params.K;
  RegulatorState ds;
  ds.xi = im.A * state.xi + im.phi_at(xi1) + omega * state.theta_hat + H * v -
          lift_M(state.X) * dz;
  ds.theta_hat = bt * v - dz;
  ds.X = params.F * state.X + params.G * omega;
  if (!ds.xi.allFinite() || !ds.theta_hat.allFinite() || !ds.X.allFinite())
    throw EvaluationError("regulator right-hand side is not finite");
  return ds;
}

ControlOutput control_output(const RegulatorState& state, double e, const RegulatorParams& params) {
  const double v = -params.k * e;
  return {state.xi[0] + v, v};
}

OutputFeedback make_regulator_feedback(const RegulatorParams& params, const ImmersionData& im,
                                       double feedback_sign) {
  if (params.d != im.d || params.q_dim != im.q_dim)
    throw ArgumentError("regulator and immersion dimensions differ");
  OutputFeedback fb;
  fb.state_dim = RegulatorState::packed_size(params.d, params.q_dim);
  fb.rhs = [params, im, feedback_sign](const Vector& zeta, double y) {
    const RegulatorState s = RegulatorState::unpack(zeta, params.d, params.q_dim);
    const double v = feedback_sign * control_output(s, y, params).v;
    return regulator_rhs(s, v, params, im).pack();
  };
  fb.output = [params, feedback_sign](const Vector& zeta, double y) {
    return zeta[0] + feedback_sign * (-params.k * y);
  };
  return fb;
}

MatoReport verify_mato_transform(const RegulatorParams& params, double tol) {
  const auto d = idx(params.d);
  const Matrix A = shift_matrix(params.d);
  const Matrix C = first_selector(params.d);
  const Vector b_hat = -params.b.tail(d - 1);

  Matrix T = Matrix::Identity(d, d);
  T.block(1, 0, d - 1, 1) = b_hat;
  Matrix T_inv = Matrix::Identity(d, d);
  T_inv.block(1, 0, d - 1, 1) = -b_hat;

  Matrix expected = Matrix::Zero(d, d);
  expected(0, 0) = -params.lambda;
  expected(0, 1) = 1.0;
  expected.bottomRightCorner(d - 1, d - 1) = params.F;
  Vector e1 = Vector::Zero(d);
  e1[0] = 1.0;

  const Matrix closed = A - params.K * C;
  MatoReport rep;
  rep.similarity_deviation = max_abs(T * closed * T_inv - expected);
  rep.tb_deviation = max_abs(Matrix(T * params.b - e1));
  rep.ct_deviation = max_abs(Matrix(C * T_inv - C));
  if (rep.similarity_deviation > tol) rep.failures.emplace_back("T(A-KC)T^-1 = [[-lambda, c],[0, F]]");
  if (rep.tb_deviation > tol) rep.failures.emplace_back("T b = e1");
  if (rep.ct_deviation > tol) rep.failures.emplace_back("C T^-1 = C");
  rep.pass = rep.failures.empty();
  return rep;
}

}  // namespace regulib
