#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "marc/case_solver.hpp"

namespace marc {

// Relay-position sweep configuration, parsed from flat key=value text with
// dotted sections (see README for the key list).
struct ExperimentConfig {
  Geometry geometry;        // relay position is the swept variable
  double relay_y = 0;
  double relay_x_start = 0.1;
  double relay_x_stop = 1.9;
  int relay_points = 25;
  Budget budget;
  int ensemble_n = 20000;
  std::uint64_t seed = 1;
  SolverConfig solver;
  double certificate_tol = 5e-3;
  std::string output_path;

  std::string serialize() const;
};

struct ConfigResult {
  ExperimentConfig config;   // defaults filled even on error
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Parses and validates; errors are aggregated, never partial.
ConfigResult validate_config(const std::string& text);

struct SweepRow {
  double relay_x = 0;
  double df_sum_rate = 0;
  std::string df_case;
  double cutset_sum_rate = 0;
  std::string cutset_case;
  double mac_baseline = 0;
  bool capacity_achieved = false;
  int solver_iterations = 0;
  bool diagnostic = false;     // solver failure on this row
  std::string diagnostic_msg;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool any_diagnostics = false;
};

// One row per sweep point; deterministic for a fixed seed. Non-relay links
// reuse the same per-link sub-seeded draws across sweep points, so curves are
// smooth in the relay position.
SweepResult run_sweep(const ExperimentConfig& config);

// CSV with 12 significant digits, schema:
// relay_x,df_sum_rate,df_case,cutset_sum_rate,cutset_case,mac_baseline,capacity_achieved,solver_iterations
void write_sweep_csv(const SweepResult& sweep, std::ostream& os);

}  // namespace marc
