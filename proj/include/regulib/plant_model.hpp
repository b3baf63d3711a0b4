#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "regulib/ode_core.hpp"

namespace regulib {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using Box = std::vector<Interval>;

/// A compact set of initial conditions, known only through a sampler and a
/// membership predicate.
struct SampleSet {
  std::function<Vector(std::mt19937_64&)> sample;
  std::function<bool(const Vector&)> contains;

  static SampleSet box(const Box& box);
  /// Closed Euclidean ball of the given radius in R^dim, sampled uniformly.
  static SampleSet ball(std::size_t dim, double radius);
};

bool box_contains(const Box& box, const Vector& x);

/// Augmented exosystem ϱ̇ = 0, ẇ = s(ϱ, w), with ϱ in a parameter box P.
struct Exosystem {
  std::size_t p = 0;
  std::size_t s_dim = 0;
  std::function<Vector(const Vector& rho, const Vector& w)> s;
  Box param_box;
  SampleSet initial_set;

  Vector eval(const Vector& rho, const Vector& w) const;
};

/// Plant in normal form with relative degree r:
///   ż = f0(ϱ,w,z) + f1(ϱ,w,z,e1) e1,  ė_i = e_{i+1},  ė_r = q(ϱ,w,z,e) + u.
struct PlantNormalForm {
  std::size_t n = 0;
  std::size_t r = 1;
  std::function<Vector(const Vector& rho, const Vector& w, const Vector& z)> f0;
  std::function<Vector(const Vector& rho, const Vector& w, const Vector& z, double e1)> f1;
  std::function<double(const Vector& rho, const Vector& w, const Vector& z, const Vector& e)> q;
  SampleSet z_set;
  /// The box |e_i| <= e_bound of initial errors.
  double e_bound = 1.0;

  Vector eval_f0(const Vector& rho, const Vector& w, const Vector& z) const;
  Vector eval_f1(const Vector& rho, const Vector& w, const Vector& z, double e1) const;
  double eval_q(const Vector& rho, const Vector& w, const Vector& z, const Vector& e) const;
  bool e_contains(const Vector& e) const;
};

/// Immersion data (τ, θ, φ, Ω) with the canonical observable pair (A, C).
///
/// φ and Ω are evaluated at a smoothly clamped argument (see `clamp_output`),
/// which makes them globally Lipschitz without changing them on |y| <= y_max - 1.
struct ImmersionData {
  std::size_t d = 0;
  std::size_t q_dim = 0;
  std::function<Vector(const Vector& rho, const Vector& w, const Vector& z)> tau;
  std::function<Vector(const Vector& rho)> theta;
  std::function<Vector(double y)> phi;
  std::function<Matrix(double y)> omega;
  Matrix A;
  Matrix C;
  double y_max = 10.0;

  Vector eval_tau(const Vector& rho, const Vector& w, const Vector& z) const;
  Vector eval_theta(const Vector& rho) const;
  Vector phi_at(double y) const;
  Matrix omega_at(double y) const;
};

/// Builds ImmersionData with A the upper shift and C = e1ᵀ.
ImmersionData make_immersion(std::size_t d, std::size_t q_dim, decltype(ImmersionData::tau) tau,
                             decltype(ImmersionData::theta) theta,
                             decltype(ImmersionData::phi) phi,
                             decltype(ImmersionData::omega) omega, double y_max = 10.0);

Matrix shift_matrix(std::size_t d);
Matrix first_selector(std::size_t d);

/// C¹ saturation: identity on |y| <= y_max - 1, constant ±y_max beyond |y| >= y_max + 1.
double clamp_output(double y, double y_max);

/// A point 𝐳 = col(ϱ, w, z) of the augmented zero-dynamics state space.
struct AugmentedPoint {
  Vector rho;
  Vector w;
  Vector z;

  Vector pack() const;
  static AugmentedPoint unpack(const Eigen::Ref<const Vector>& v, std::size_t p, std::size_t s_dim,
                               std::size_t n);
};

/// Output feedback with scalar measurement: ζ̇ = rhs(ζ, y), u = output(ζ, y).
struct OutputFeedback {
  std::size_t state_dim = 0;
  std::function<Vector(const Vector& zeta, double y)> rhs;
  std::function<double(const Vector& zeta, double y)> output;
};

/// Output feedback driven by the full measured output y = col(e1..er).
struct MeasuredFeedback {
  std::size_t state_dim = 0;
  std::size_t output_dim = 1;
  std::function<Vector(const Vector& zeta, const Vector& y)> rhs;
  std::function<double(const Vector& zeta, const Vector& y)> output;
};

/// Checks dimensions of the plant/exosystem pair; throws ArgumentError.
void validate_model(const PlantNormalForm& plant, const Exosystem& exo);

/// Friend control c(𝐳) = -q(ϱ, w, z, 0, ..., 0).
double friend_control(const PlantNormalForm& plant, const AugmentedPoint& pt);

/// Augmented zero dynamics ϱ̇ = 0, ẇ = s(ϱ,w), ż = f0(ϱ,w,z) on col(ϱ, w, z).
VectorField zero_dynamics_field(const PlantNormalForm& plant, const Exosystem& exo);

struct ImmersionResidual {
  /// ∂τ/∂𝐳 · f0(𝐳) - [Aτ + φ(Cτ) + Ω(Cτ) θ(ϱ)], with the directional derivative
  /// taken by central differences along the zero-dynamics field.
  Vector ode;
  /// c(𝐳) - Cτ(𝐳).
  double out = 0.0;
};

ImmersionResidual immersion_residual(const ImmersionData& im, const PlantNormalForm& plant,
                                     const Exosystem& exo, const AugmentedPoint& pt,
                                     double fd_step = 1e-5);

struct AttractorSample {
  std::vector<AugmentedPoint> points;
  /// Initial points whose zero-dynamics orbit left the divergence bound.
  std::vector<AugmentedPoint> violations;
};

/// Approximate samples of the steady-state attractor: endpoints of zero-dynamics
/// orbits started from random points of P x W x Z after a burn-in time.
AttractorSample attractor_sample(const PlantNormalForm& plant, const Exosystem& exo,
                                 std::size_t n_init, double t_burn, double h,
                                 std::uint64_t seed = 0, double divergence_bound = 1e6);

}  // namespace regulib
