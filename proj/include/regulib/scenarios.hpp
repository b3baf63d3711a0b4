#pragma once

#include <functional>
#include <string>
#include <vector>

#include "regulib/closed_loop.hpp"

namespace regulib {

struct NamedScenario {
  std::string name;
  std::string description;
  std::function<Scenario()> build;
};

/// ẇ1 = ϱw2, ẇ2 = -ϱw1 with ϱ in [0.8, 1.2]; ż = -z, ė = -w1 + z + u.
/// Immersion τ = (w1, ϱw2), θ = ϱ², φ = 0, Ω(y) = col(0, -y). On the attractor
/// z = 0 and σ(𝐳) = (-2w1 + ϱw2)/(ϱ² + 4) for b = (1, 2).
NamedScenario canonical_harmonic();

/// Same plant with q moved one integrator down: ė1 = e2, ė2 = -w1 + z + u.
/// Reduction polynomial λ + 1 and g = 10.
NamedScenario canonical_harmonic_r2();

/// Two redundant parameters: Ω(y) = [col(0,-y), col(0,-y)], θ = (ϱ²/2, ϱ²/2).
/// The regressor has rank one, so excitation fails while e still converges.
NamedScenario pe_negative_control();

/// harmonic1 with v = +k e injected.
NamedScenario wrong_sign_control();

const std::vector<NamedScenario>& scenario_registry();
std::vector<std::string> scenario_names();
/// Throws ConfigError for unknown names.
Scenario build_scenario(const std::string& name);

}  // namespace regulib
