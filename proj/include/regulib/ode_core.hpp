#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "regulib/errors.hpp"

namespace regulib {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Autonomous-or-not vector field ẋ = rhs(t, x) on R^dim.
///
/// rhs must be pure: identical (t, x) give identical outputs.
struct VectorField {
  std::size_t dim = 0;
  std::function<Vector(double, const Vector&)> rhs;

  /// Evaluates rhs and checks the output length.
  Vector operator()(double t, const Vector& x) const;
};

/// Time-stamped states on a strictly increasing grid, stored contiguously.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::size_t dim);

  void reserve(std::size_t samples);
  /// Appends a sample; throws ArgumentError on non-increasing time or wrong length.
  void push_back(double t, const Vector& x);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  std::span<const double> times() const noexcept { return times_; }
  double time(std::size_t i) const { return times_.at(i); }
  Eigen::Map<const Vector> state(std::size_t i) const;
  Eigen::Map<const Vector> back() const { return state(size() - 1); }

  /// Component `c` across all samples.
  std::vector<double> component(std::size_t c) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<double> data_;
};

/// Classical fourth-order Runge-Kutta step.
Vector rk4_step(const VectorField& field, double t, const Vector& x, double h);

/// Number of uniform steps of size h needed to reach t1 from t0.
std::size_t step_count(double t0, double t1, double h);

/// Fixed-step RK4 on the grid t0 + i h, i = 0..step_count(t0, t1, h).
Trajectory integrate(const VectorField& field, const Vector& x0, double t0, double t1,
                     double h);

struct IntegrateOptions {
  /// Integration stops once the Euclidean state norm exceeds this bound.
  double divergence_bound = std::numeric_limits<double>::infinity();
};

struct IntegrationResult {
  Trajectory trajectory;
  /// Time stamp of the first sample whose norm exceeded the bound.
  std::optional<double> diverged_at;
};

IntegrationResult integrate(const VectorField& field, const Vector& x0, double t0, double t1,
                            double h, const IntegrateOptions& options);

// Dense linear-algebra helpers.

std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// True iff every eigenvalue has real part below -tol.
bool is_hurwitz(const Matrix& m, double tol = 1e-10);

/// Symmetric positive-definite P with P F + Fᵀ P = -I.
/// Throws SynthesisError if F is not Hurwitz.
Matrix solve_lyapunov(const Matrix& f);

/// Smallest eigenvalue of a symmetric matrix (symmetry checked to 1e-10).
double eig_min_symmetric(const Matrix& s);

Matrix expm(const Matrix& m);

double max_abs(const Matrix& m);

}  // namespace regulib
