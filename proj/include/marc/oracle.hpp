#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "marc/power_policy.hpp"

namespace marc {

// Brute-force grid reference for tiny instances (K <= 2, n <= 8), used only
// by tests and acceptance runs.
struct GridSpec {
  int steps_per_axis = 21;              // values per per-sample power axis
  std::int64_t guard = 100'000'000;     // max evaluated policies
};

struct GridGuardExceeded : std::runtime_error {
  GridGuardExceeded(std::int64_t needed, std::int64_t guard)
      : std::runtime_error("oracle grid guard exceeded: " + std::to_string(needed) + " > " +
                           std::to_string(guard)),
        needed(needed) {}
  std::int64_t needed;
};

struct OracleResult {
  double value = 0;
  PowerPolicy policy;
  double step1 = 0, step2 = 0;       // per-user grid steps actually used
  std::int64_t evaluated = 0;
  // Lipschitz bound of the objective over the power box: |true optimum -
  // grid optimum| <= lipschitz * max step.
  double lipschitz = 0;
};

// Exhaustive search over per-sample power grids: each user column ranges over
// all quantized allocations with mean <= P_bar (cap n * P_bar per sample);
// the relay column is exhausted separately (its term enters every bound
// monotonically, so its best column is independent of the user columns).
// Scores each policy by the Lemma-1 subset-split minimum.
OracleResult grid_best_sum_rate(const FadingEnsemble& ens, const Budget& budget,
                                const GridSpec& grid);

// Same grid, scoring by max_{R in intersection} mu . R per policy.
OracleResult grid_best_weighted(const FadingEnsemble& ens, const Budget& budget,
                                const std::vector<double>& mu, const GridSpec& grid);

}  // namespace marc
