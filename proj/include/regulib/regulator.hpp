#pragma once

#include <string>
#include <vector>

#include "regulib/plant_model.hpp"

namespace regulib {

/// Design parameters of the adaptive internal-model regulator
///
///   u  = ξ1 + v
///   ξ̇  = Aξ + φ(ξ1) + Ω(ξ1) θ̂ + H(X, ξ1) v - M(X) dzv(θ̂)
///   θ̂̇  = β(X, ξ1) v - dzv(θ̂)
///   Ẋ  = F X + G Ω(ξ1)
///
/// with v = -k e. F, G and K are derived from b and λ and never set directly.
struct RegulatorParams {
  Vector b;
  double lambda = 1.0;
  double k = 1.0;
  double ell = 1.0;
  std::size_t d = 0;
  std::size_t q_dim = 0;
  Matrix F;
  Matrix G;
  Vector K;
};

/// Validates (b, λ, k, ℓ) and derives F, G, K. Throws SynthesisError or ArgumentError.
RegulatorParams make_regulator_params(const Vector& b, double lambda, double k, double ell,
                                      std::size_t q_dim);

struct FilterMatrices {
  Matrix F;  // (d-1) x (d-1)
  Matrix G;  // (d-1) x d
};

/// F and G of the X-filter. Requires b1 = 1 and the polynomial
/// λ^{d-1} + b2 λ^{d-2} + ... + bd to have distinct roots in the open left half plane.
FilterMatrices build_fg(const Vector& b);

/// b = col(1, b2..bd) whose polynomial has the given roots.
Vector b_from_roots(const std::vector<double>& roots);

/// K = A b + λ b.
Vector gain_K(const Vector& b, double lambda, const Matrix& A);

/// max over a grid on P (vertices included) of |θ(ϱ)|∞.
double max_theta_norm(const ImmersionData& im, const Box& box, std::size_t points_per_axis = 11);

/// 1.05 x max_theta_norm.
double default_dead_zone(const ImmersionData& im, const Box& box);

/// Throws SynthesisError unless ℓ exceeds the sampled max |θ(ϱ)|∞ over P.
void validate_dead_zone(const RegulatorParams& params, const ImmersionData& im, const Box& box);

/// M(X) = col(0, X), d x q.
Matrix lift_M(const Matrix& X);

/// β(X, ξ1) with βᵀ = C A M(X) + C Ω(ξ1).
Vector beta(const Matrix& X, double xi1, const ImmersionData& im);

/// H(X, ξ1) = M(X) β(X, ξ1) + K.
Vector bigH(const Matrix& X, double xi1, const RegulatorParams& params, const ImmersionData& im);

/// C¹ dead zone: 0 on |x| <= ℓ, x on |x| >= ℓ+1, cubic Hermite blend between.
double deadzone_scalar(double x, double ell);
Vector deadzone_vec(const Vector& v, double ell);

struct RegulatorState {
  Vector xi;
  Vector theta_hat;
  Matrix X;

  /// Flattened as col(ξ, θ̂, X row by row).
  Vector pack() const;
  static RegulatorState unpack(const Eigen::Ref<const Vector>& v, std::size_t d, std::size_t q_dim);
  static std::size_t packed_size(std::size_t d, std::size_t q_dim) { return d + q_dim + (d - 1) * q_dim; }
};

/// Time derivative of the regulator state for a given stabilizing input v.
RegulatorState regulator_rhs(const RegulatorState& state, double v, const RegulatorParams& params,
                             const ImmersionData& im);

struct ControlOutput {
  double u = 0.0;
  double v = 0.0;
};

/// v = -k e, u = ξ1 + v.
ControlOutput control_output(const RegulatorState& state, double e, const RegulatorParams& params);

/// The regulator as an output feedback on the regulated error.
/// `feedback_sign` = -1 turns v = -k e into v = +k e (destabilizing test device).
OutputFeedback make_regulator_feedback(const RegulatorParams& params, const ImmersionData& im,
                                       double feedback_sign = 1.0);

/// Checks T(A-KC)T⁻¹ = [[-λ, ĉ], [0, F]], T b = e1, C T⁻¹ = C with
/// T = [[1, 0], [b̂, I]], b̂ = -col(b2..bd).
struct MatoReport {
  double similarity_deviation = 0.0;
  double tb_deviation = 0.0;
  double ct_deviation = 0.0;
  bool pass = false;
  std::vector<std::string> failures;
};

MatoReport verify_mato_transform(const RegulatorParams& params, double tol = 1e-12);

}  // namespace regulib
