#include "regulib/ode_core.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace regulib {

Vector VectorField::operator()(double t, const Vector& x) const {
  Vector dx = rhs(t, x);
  if (static_cast<std::size_t>(dx.size()) != dim) {
    std::ostringstream os;
    os << "vector field returned " << dx.size() << " components, expected " << dim;
    throw ArgumentError(os.str());
  }
  return dx;
}

Trajectory::Trajectory(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ArgumentError("trajectory dimension must be positive");
}

void Trajectory::reserve(std::size_t samples) {
  times_.reserve(samples);
  data_.reserve(samples * dim_);
}

void Trajectory::push_back(double t, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != dim_)
    throw ArgumentError("trajectory sample has wrong length");
  if (!times_.empty() && !(t > times_.back()))
    throw ArgumentError("trajectory time stamps must be strictly increasing");
  times_.push_back(t);
  data_.insert(data_.end(), x.data(), x.data() + x.size());
}

Eigen::Map<const Vector> Trajectory::state(std::size_t i) const {
  if (i >= size()) throw ArgumentError("trajectory index out of range");
  return {data_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
}

std::vector<double> Trajectory::component(std::size_t c) const {
  if (c >= dim_) throw ArgumentError("trajectory component out of range");
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = data_[i * dim_ + c];
  return out;
}

namespace {

void check_finite(const Vector& v, double t) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream os;
      os << "non-finite derivative at t=" << t << " in component " << i;
      throw IntegrationError(t, static_cast<std::size_t>(i), os.str());
    }
  }
}

Vector eval_checked(const VectorField& field, double t, const Vector& x) {
  Vector dx = field(t, x);
  check_finite(dx, t);
  return dx;
}

}  // namespace

Vector rk4_step(const VectorField& field, double t, const Vector& x, double h) {
  if (!(h > 0.0)) throw ArgumentError("rk4_step: step size must be positive");
  if (static_cast<std::size_t>(x.size()) != field.dim)
    throw ArgumentError("rk4_step: state length does not match field dimension");
  const double half = 0.5 * h;
  const Vector k1 = eval_checked(field, t, x);
  const Vector k2 = eval_checked(field, t + half, x + half * k1);
  const Vector k3 = eval_checked(field, t + half, x + half * k2);
  const Vector k4 = eval_checked(field, t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::size_t step_count(double t0, double t1, double h) {
  if (!(t1 > t0)) throw ArgumentError("integrate: t1 must exceed t0");
  if (!(h > 0.0)) throw ArgumentError("integrate: step size must be positive");
  const double n = (t1 - t0) / h;
  const double nearest = std::round(n);
  // Absorb representation error in T/h so that e.g. 200/1e-3 is 200000 steps.
  if (std::abs(n - nearest) <= 1e-9 * std::max(1.0, n)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(n));
}

IntegrationResult integrate(const VectorField& field, const Vector& x0, double t0, double t1,
                            double h, const IntegrateOptions& options) {
  const std::size_t steps = step_count(t0, t1, h);
  IntegrationResult result{Trajectory(field.dim), std::nullopt};
  Trajectory& traj = result.trajectory;
  traj.reserve(steps + 1);
  traj.push_back(t0, x0);
  Vector x = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    try {
      x = rk4_step(field, t, x, h);
    } catch (const IntegrationError&) {
      if (std::isfinite(options.divergence_bound)) {
        result.diverged_at = t;
        return result;
      }
      throw;
    }
    const double t_next = t0 + static_cast<double>(i + 1) * h;
    traj.push_back(t_next, x);
    if (x.norm() > options.divergence_bound) {
      result.diverged_at = t_next;
      return result;
    }
  }
  return result;
}

Trajectory integrate(const VectorField& field, const Vector& x0, double t0, double t1,
                     double h) {
  return integrate(field, x0, t0, t1, h, IntegrateOptions{}).trajectory;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw ArgumentError("eigenvalues: matrix must be square");
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(m), false);
  if (solver.info() != Eigen::Success) throw AnalysisError("eigenvalue iteration failed");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

bool is_hurwitz(const Matrix& m, double tol) {
  for (const auto& ev : eigenvalues(m))
    if (ev.real() >= -tol) return false;
  return true;
}

Matrix solve_lyapunov(const Matrix& f) {
  if (f.rows() != f.cols()) throw ArgumentError("solve_lyapunov: matrix must be square");
  for (const auto& ev : eigenvalues(f)) {
    if (ev.real() >= -1e-10) {
      std::ostringstream os;
      os << "solve_lyapunov: matrix is not Hurwitz (eigenvalue " << ev.real() << "+"
         << ev.imag() << "i)";
      throw SynthesisError(os.str());
    }
  }
  const Eigen::Index n = f.rows();
  const Eigen::MatrixXd fc = f;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  // Column-major vec: vec(FᵀP) = (I⊗Fᵀ) vec P, vec(PF) = (Fᵀ⊗I) vec P.
  const Eigen::MatrixXd op =
      Eigen::kroneckerProduct(id, fc.transpose()) + Eigen::kroneckerProduct(fc.transpose(), id);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
  auto solve = [&](const Eigen::MatrixXd& rhs) {
    const Eigen::VectorXd v = lu.solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * n));
    return Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n));
  };
  Eigen::MatrixXd p = solve(-id);
  p = 0.5 * (p + p.transpose()).eval();
  // One round of iterative refinement.
  const Eigen::MatrixXd residual = -id - (p * fc + fc.transpose() * p);
  p += solve(residual);
  p = 0.5 * (p + p.transpose()).eval();
  return p;
}

double eig_min_symmetric(const Matrix& s) {
  if (s.rows() != s.cols()) throw ArgumentError("eig_min_symmetric: matrix must be square");
  if (s.rows() == 0) throw ArgumentError("eig_min_symmetric: empty matrix");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ArgumentError("eig_min_symmetric: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(s),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Matrix expm(const Matrix& m) {
  const Eigen::MatrixXd mc = m;
  return mc.exp();
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace regulib
