#pragma once

#include <vector>

#include "regulib/plant_model.hpp"

namespace regulib {

/// Design data of the reduction from relative degree r to one.
///
/// `a` holds a_0..a_{r-2}, the non-leading coefficients of the monic Hurwitz
/// polynomial λ^{r-1} + a_{r-2} λ^{r-2} + ... + a_0; `g` is the high-gain scale.
struct ReductionParams {
  std::vector<double> a;
  double g = 2.0;
};

/// Throws SynthesisError unless the polynomial is Hurwitz and g > 1.
void validate_reduction(const ReductionParams& params);

/// Coefficients a_0..a_{m-1} of ∏(λ - root_i), constant term first.
std::vector<double> hurwitz_coeffs(const std::vector<double>& roots);

/// Weights g^{r-1-i} a_i multiplying e_{i+1}, i = 0..r-2.
std::vector<double> chain_weights(const ReductionParams& params);

/// ẽ = e_r + Σ g^{r-1-i} a_i e_{i+1}.
double tilde_e(const ReductionParams& params, const Vector& e);

/// Relative-degree-one plant in the coordinates z̃ = col(z, e_1..e_{r-1}), ẽ.
struct ReducedPlant {
  PlantNormalForm plant;
  PlantNormalForm original;
  ReductionParams params;
  /// (1 + g^{r-1} a_0 + ... + g a_{r-2}) c.
  double tilde_c_bound = 0.0;

  /// q̃(ϱ, w, z̃, ẽ): the ẽ-derivative is q̃ + u.
  double tilde_q(const Vector& rho, const Vector& w, const Vector& z_tilde,
                 double e_tilde) const;
  /// Original e = col(e_1..e_r) recovered from (z̃, ẽ).
  Vector original_error(const Vector& z_tilde, double e_tilde) const;
};

ReducedPlant reduce_plant(const PlantNormalForm& plant, const ReductionParams& params);

/// τ̃(ϱ, w, z̃) = τ(ϱ, w, z): the immersion of the reduced plant, which agrees
/// with the original one on the reduced attractor (e-chain at rest).
ImmersionData lift_immersion(const ImmersionData& im, std::size_t n);

/// Feeds `controller` with ẽ computed from the measured y = col(e_1..e_r).
MeasuredFeedback lift_controller(const OutputFeedback& controller, const ReductionParams& params,
                                 std::size_t r);

/// Scalar-output feedback viewed as a feedback on y = (e_1).
MeasuredFeedback as_measured(const OutputFeedback& controller);

}  // namespace regulib
