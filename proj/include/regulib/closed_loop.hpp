#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regulib/rd_reduction.hpp"
#include "regulib/regulator.hpp"

namespace regulib {

struct InitialConditions {
  Vector rho;
  Vector w;
  Vector z;
  Vector e;  // length r
  Vector xi;
  Vector theta_hat;
  Matrix X;
};

/// A complete closed-loop experiment: models, design parameters, initial state
/// and integrator settings.
struct Scenario {
  std::string name;
  Exosystem exo;
  PlantNormalForm plant;
  ImmersionData immersion;
  RegulatorParams regulator;
  /// Required iff plant.r > 1.
  std::optional<ReductionParams> reduction;
  InitialConditions init;
  double horizon = 200.0;
  double step = 1e-3;
  std::uint64_t seed = 0;
  /// -1 injects v = +k e instead of v = -k e.
  double feedback_sign = 1.0;
  double tol_e = 1e-3;
  double terminal_fraction = 0.1;
  double divergence_bound = 1e6;
  /// Window length for excitation checks.
  double pe_window = 6.283185307179586;
};

/// Throws ArgumentError / SynthesisError when the scenario violates its invariants.
void validate(const Scenario& s);

/// The relative-degree-one problem the regulator is designed for: the plant
/// itself when r = 1, its reduction otherwise.
PlantNormalForm effective_plant(const Scenario& s);
ImmersionData effective_immersion(const Scenario& s);

/// Named contiguous blocks of a flat state vector.
struct StateBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  /// Column count when the block stores a matrix row by row, else 0.
  std::size_t cols = 0;
};

struct StateLayout {
  std::vector<StateBlock> blocks;
  std::size_t dim = 0;

  void add(std::string name, std::size_t size, std::size_t cols = 0);
  const StateBlock& block(const std::string& name) const;
  Eigen::Map<const Vector> view(const Eigen::Ref<const Vector>& x, const std::string& name) const;
  /// Column labels such as rho_1, w_2, X_1_1 (X entries as X_row_col).
  std::vector<std::string> labels() const;
};

/// (ϱ, w, z, e_1..e_r, ξ, θ̂, X).
StateLayout closed_loop_layout(const Scenario& s);
/// (ϱ, w, z̃, η, θ̃, X) with z̃ the effective plant state.
StateLayout zero_dynamics_layout(const Scenario& s);

Vector initial_state(const Scenario& s);

/// The regulator as a feedback on the measured output, lifted through the
/// reduction when r > 1.
MeasuredFeedback closed_loop_controller(const Scenario& s);

/// Plant + exosystem + regulator with v = -k e. The regulator sees only y.
VectorField assemble_closed_loop(const Scenario& s);

/// Same loop written in reduced coordinates: the last error e_r is replaced by ẽ
/// and the regulator is fed ẽ directly. Identical layout to assemble_closed_loop.
VectorField assemble_reduced_closed_loop(const Scenario& s);

/// Maps a closed-loop state to the reduced coordinates (e_r -> ẽ).
Vector to_reduced_coordinates(const Scenario& s, const Eigen::Ref<const Vector>& x);

/// Zero dynamics of the regulated loop on (ϱ, w, z̃, η, θ̃, X).
VectorField assemble_regulator_zero_dynamics(const Scenario& s);

struct Metrics {
  std::map<std::string, double> sup_norm;
  /// max |e| over the terminal window.
  double terminal_e = 0.0;
  std::optional<double> settling_time;
  /// |θ̂(T) - θ(ϱ)|.
  double theta_error = 0.0;
  /// Total time with dzv(θ̂) != 0.
  double dead_zone_active_time = 0.0;
  /// No divergence and sup over [T/2, T] <= 1.01 sup over [0, T/2].
  bool bounded = false;
  bool regulated = false;
};

struct SimResult {
  Trajectory trajectory;
  StateLayout layout;
  Metrics metrics;
  std::optional<double> diverged_at;
};

Metrics compute_metrics(const Trajectory& traj, const StateLayout& layout, const Scenario& s,
                        bool diverged);

SimResult simulate(const Scenario& s);
SimResult simulate_reduced(const Scenario& s);

/// Diagnostic coordinates θ̃ = θ̂ - θ(ϱ) - β x, η = ξ - M(θ̂ - θ(ϱ)) - K x
/// with x the regulated output seen by the regulator.
struct DiagnosticTrajectory {
  std::vector<double> times;
  std::vector<Vector> zbold;  // col(ϱ, w, z̃)
  std::vector<Vector> eta;
  std::vector<Vector> theta_tilde;
  std::vector<Matrix> X;
};

DiagnosticTrajectory diagnostic_coordinates(const SimResult& sim, const Scenario& s,
                                            std::size_t stride = 1);

}  // namespace regulib
