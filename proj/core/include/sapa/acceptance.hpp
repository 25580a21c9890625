#pragma once

#include <string>
#include <vector>

namespace sapa {

struct CriterionResult {
  std::string name;  // "A1".."A9"
  bool passed = false;
  std::string detail;    // measured values and pinned tolerances
  double seconds = 0.0;  // wall clock for this criterion
};

struct AcceptanceOptions {
  std::vector<std::string> only;  // empty: run all criteria
  std::string cli_path;           // binary for the end-to-end determinism checks
  int jobs = 1;                   // replica parallelism
};

// Names of all criteria, in execution order.
const std::vector<std::string>& acceptance_names();

// Runs the requested criteria with pinned parameters, seeds, and tolerances.
// Simulation-backed criteria share their replica ensembles within one call.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

}  // namespace sapa
