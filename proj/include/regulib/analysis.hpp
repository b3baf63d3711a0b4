#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regulib/closed_loop.hpp"

namespace regulib {

/// Initial (ϱ, w, z̃) of the scenario, with z̃ = col(z, e_1..e_{r-1}) when r > 1.
AugmentedPoint initial_point(const Scenario& s);

/// Endpoint of the zero-dynamics orbit through `pt` after `t_burn`.
AugmentedPoint burn_in(const PlantNormalForm& plant, const Exosystem& exo, const AugmentedPoint& pt,
                       double t_burn, double h);

struct SigmaResult {
  Matrix value;
  /// ‖G‖ sup|Ω| e^{-μT}/μ with μ = min |Re eig F|.
  double tail_bound = 0.0;
  double horizon = 0.0;
  /// Backward orbit left the divergence bound; the integral was truncated there.
  bool backward_diverged = false;
};

/// Steady-state value of the X-filter, σ(𝐳) = ∫_{-∞}^0 e^{-Fs} G Ω(τ1(𝐳(s))) ds,
/// truncated to [-T_sigma, 0] and evaluated by the trapezoid rule on the
/// backward integration grid. T_sigma <= 0 picks the horizon that brings the
/// tail bound below 1e-10.
SigmaResult sigma_map(const AugmentedPoint& pt, const PlantNormalForm& plant, const Exosystem& exo,
                      const ImmersionData& im, const RegulatorParams& params, double T_sigma = 0.0,
                      double h = 1e-3, double divergence_bound = 1e6);

struct GraphInvarianceReport {
  /// max |X(t) - σ(𝐳(t))| starting from X0 = σ(𝐳0).
  double invariance_deviation = 0.0;
  /// max |X(t) - e^{Ft}Δ - σ(𝐳(t))| starting from X0 = σ(𝐳0) + Δ.
  double ssnl_deviation = 0.0;
  std::size_t checkpoints = 0;
  bool pass = false;
};

GraphInvarianceReport verify_graph_invariance(const AugmentedPoint& pt, const PlantNormalForm& plant,
                                              const Exosystem& exo, const ImmersionData& im,
                                              const RegulatorParams& params, double T, double h,
                                              double check_interval = 0.5,
                                              double perturbation = 1.0, double tol = 1e-6);

struct PEReport {
  double t_start = 0.0;
  double t_end = 0.0;
  Matrix gram;
  double min_eig = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Gram matrix ∫_0^L φφᵀ dt of the regressor φ(𝐳) = β(σ(𝐳), τ1(𝐳)) along the
/// attractor orbit through `pt`. threshold < 0 selects 1e-6 L.
PEReport pe_gram(const AugmentedPoint& pt, const PlantNormalForm& plant, const Exosystem& exo,
                 const ImmersionData& im, const RegulatorParams& params, double L, double h,
                 double threshold = -1.0);

struct LyapunovReport {
  std::vector<double> V;
  double max_increment = 0.0;
  bool on_attractor = false;
  std::string warning;
};

/// V = χ1² + ζᵀPζ + θ̃ᵀθ̃ along a trajectory of assemble_regulator_zero_dynamics,
/// with χ = η - τ(𝐳), ζ = b̂χ1 + χ2 and P F + Fᵀ P = -I.
LyapunovReport lyapunov_monitor(const Trajectory& zero_dynamics, const Scenario& s);

/// Zero-dynamics state (layout of zero_dynamics_layout) at `pt` with
/// η = τ(pt) + χ1 e1, the given θ̃ and X = σ(pt).
Vector zero_dynamics_start(const Scenario& s, const AugmentedPoint& pt, double chi1,
                           const Vector& theta_tilde, double h = 1e-3);

/// Distance of (η, θ̃, X) to (τ(𝐳), 0, σ(𝐳)) along a diagnostic trajectory.
/// σ is evaluated at the first sample and transported along the recorded 𝐳(t).
std::vector<double> limit_set_distance(const DiagnosticTrajectory& diag, const PlantNormalForm& plant,
                                       const Exosystem& exo, const ImmersionData& im,
                                       const RegulatorParams& params);
std::vector<double> limit_set_distance(const DiagnosticTrajectory& diag, const Scenario& s);

struct DistanceSeries {
  std::vector<double> times;
  std::vector<double> distance;
};

/// Limit-set distance of a simulation. σ is transported over every recorded
/// step (the quadrature error grows with the sample spacing) and the distance
/// is reported every `stride` samples.
DistanceSeries limit_set_distance(const SimResult& sim, const Scenario& s, std::size_t stride = 1);

struct DecayFit {
  double rate = 0.0;
  double prefactor = 0.0;
  double rmse = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line through (t, log dist) after skipping the leading fraction
/// of the time span. Distances are clamped below at 1e-14.
DecayFit fit_exponential_decay(const std::vector<double>& distances, const std::vector<double>& times,
                               double skip_fraction = 0.3);

struct DeadZoneReport {
  /// min θ̃ᵀ dzv(θ̃ + θ) over the samples.
  double min_inner = 0.0;
  /// δ = √q (2ℓ + 1) + 0.1.
  double delta = 0.0;
  /// min 2θ̃ᵀ dzv(θ̃ + θ) / |θ̃|² over samples with |θ̃| >= δ.
  double coercivity_floor = 0.0;
  std::size_t samples = 0;
};

/// Random-sample monitor of the dead-zone sign and coercivity properties for
/// parameters |θ|∞ <= theta_bound < ℓ.
DeadZoneReport deadzone_monitor(double ell, std::size_t q_dim, double theta_bound,
                                std::size_t samples, std::uint64_t seed = 0);

enum class Gain { k, g, lambda };

Gain parse_gain(const std::string& name);
std::string gain_name(Gain gain);
/// 1 for k and λ, 2 for g.
double default_floor(Gain gain);
/// Copy of `s` with the gain replaced (regulator re-synthesized as needed).
Scenario with_gain(const Scenario& s, Gain gain, double value);

struct ProbeTrial {
  double gain = 0.0;
  bool passed = false;
  bool bounded = false;
  std::optional<double> diverged_at;
  double terminal_e = 0.0;
  double theta_error = 0.0;
};

struct ProbeReport {
  Gain gain = Gain::k;
  std::vector<ProbeTrial> ladder;
  std::optional<double> passing_gain;
  std::optional<double> last_divergence_time;
};

/// Simulates the scenario with the gain doubled from `floor` (floor, 2 floor, ...,
/// 2^max_doublings floor) until a run is bounded and meets tol_e. Trials are
/// independent; up to `threads` run concurrently (0 = REGULIB_THREADS or the
/// hardware concurrency). The ladder stops at the first passing trial.
ProbeReport small_gain_probe(const Scenario& tmpl, Gain gain, std::size_t max_doublings,
                             std::optional<double> floor = std::nullopt, std::size_t threads = 0);

/// Worker count for probes: REGULIB_THREADS if set and positive, else hardware concurrency.
std::size_t probe_threads();

}  // namespace regulib
