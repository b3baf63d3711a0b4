#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "regulib/config.hpp"

namespace regulib::cli {

enum ExitCode : int {
  ok = 0,
  config_error = 2,
  diverged = 3,
  probe_exhausted = 4,
  verify_failed = 5,
};

/// Analyses understood by `run --analyses`.
const std::vector<std::string>& analysis_names();

/// Reports for the requested analyses on a finished simulation.
Json run_analyses(const Scenario& s, const SimResult& sim, const std::vector<std::string>& names);

Json metrics_json(const SimResult& sim);

/// Structural checks behind `verify`: MaTo identities, immersion residuals,
/// excitation and graph invariance.
Json verify_checks(const Scenario& s);

/// Writes the trajectory with a header row and 17 significant digits.
void write_csv(const std::string& path, const SimResult& sim);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace regulib::cli
