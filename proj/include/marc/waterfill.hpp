#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace marc {

// Lagrange multipliers of a case solve: nu for the K+1 average-power
// constraints, alpha for the 0-2 equality (boundary) conditions.
struct DualVariables {
  std::vector<double> nu;
  std::vector<double> alpha;
};

struct SolverConfig {
  double power_tol = 1e-8;  // relative residual for E[P_k] = P_bar_k
  double kkt_tol = 1e-7;    // max KKT residual accepted
  double iter_tol = 1e-10;  // objective-change stopping threshold
  int max_iters = 10000;
  double alpha_tol = 1e-6;  // boundary-condition residual tolerance
  // scheduling ties go to the lower user index
};

struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(what), residuals(std::move(residuals)) {}
  std::vector<double> residuals;
};

struct WaterfillResult {
  std::vector<double> powers;
  double nu = 0;             // dual for the power constraint; 0 when the
                             // constraint is slack (p_bar = 0 or dead channel)
  double water_level = 0;    // fraction / (nu ln 2) when nu > 0
  bool zero_channel = false; // all gains zero with p_bar > 0: rate is 0
};

// Single-link water-filling P(h) = (fraction/(nu ln2) - fraction/|h|^2)^+ with
// nu set so the sample-average power equals p_bar. Solved exactly from the
// sorted breakpoints, no iteration.
WaterfillResult waterfill_single(std::span<const double> gain2, double fraction, double p_bar,
                                 const SolverConfig& cfg);

struct MacWaterfillResult {
  std::vector<std::vector<double>> powers;  // [user][sample]
  std::vector<double> nu;                   // per user
  std::vector<bool> zero_channel;
  int cycles = 0;
};

// Multiuser opportunistic water-filling: per sample only the user maximizing
// |h_k|^2 / nu_k transmits (ties to the lower index), with water-filling power
// on its own gain. The nu_k are found by coordinate-wise bisection until every
// average-power constraint is met within cfg.power_tol.
MacWaterfillResult waterfill_mac_opportunistic(const std::vector<std::vector<double>>& gain2,
                                               double theta,
                                               const std::vector<double>& p_bars,
                                               const SolverConfig& cfg);

// Ergodic sum-rate theta * E[C(sum_k g_k P_k / theta)] of a MAC policy, bits.
double mac_sum_rate(const std::vector<std::vector<double>>& gain2,
                    const std::vector<std::vector<double>>& powers, double theta);

}  // namespace marc
