#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "marc/case_label.hpp"
#include "marc/objective.hpp"
#include "marc/waterfill.hpp"

namespace marc {

struct IterativeResult {
  PowerPolicy policy;
  DualVariables duals;          // nu: K users then relay (relay dual scaled by its weight)
  std::vector<double> trace;    // objective after each sweep; nondecreasing
  bool converged = false;
  int sweeps = 0;
  std::vector<bool> zero_channel;  // per user: no positive-gain term anywhere
};

// Alternating per-user updates for a ratio-term (non-logdet) case objective:
// fix the other columns, solve each sample's scalar KKT equation
// f_u(P) = nu_u ln2 (positive root of a ratio-sum equation, else 0), with
// nu_u re-solved each sweep to meet the average-power constraint. The relay
// column is water-filled on its direct link at full budget before the sweeps.
IterativeResult solve_iterative(const FadingEnsemble& ens, const Budget& budget,
                                const CaseObjective& obj, const SolverConfig& cfg,
                                const PowerPolicy* warm = nullptr);

// Spec-facing wrapper: the case must be 3c or a boundary case and carries the
// case's equality-condition weights (alpha, or alpha1/alpha2 for (l,3c)).
IterativeResult iterative_nonwf(const FadingEnsemble& ens, const Budget& budget,
                                const std::vector<double>& weights, const CaseLabel& label,
                                const SolverConfig& cfg, const PowerPolicy* warm = nullptr);

// Builds the Lagrangian-weighted DF objective for a case. weights:
//   Active 3c:        {alpha}  ->  alpha R_{K,r} + (1-alpha) R_{K,d}
//   Boundary (l, n!=3c): {alpha} -> alpha S^(l) + (1-alpha) S^(n)
//   Boundary (l, 3c): {a1, a2} -> a1 S^(l) + a2 S^(3a) + (1-a1-a2) S^(3b)
CaseObjective df_case_objective(const CaseLabel& label, int k, const std::vector<double>& weights);
CaseObjective cutset_case_objective(const CaseLabel& label, int k,
                                    const std::vector<double>& weights);

struct BoundaryWeightResult {
  std::vector<double> weights;  // the alpha(s) found
  IterativeResult inner;
  std::vector<double> residuals;  // equality-condition residuals at return
  bool crossing_found = false;    // false: endpoint returned with diagnostic
};

// Outer scalar search for the boundary-condition multiplier(s) wrapped around
// the case's inner solver: bisection on the signed residual, nested over
// (alpha1, alpha2) for (l,3c). Residual sign convention per case:
//   3c:        g(alpha)  = R_{K,r} - R_{K,d}
//   (l,n!=3c): g(alpha)  = S^(l) - S^(n)
//   (l,3c):    outer g1(a1) = S^(l) - R_{K,r}, inner g2 = R_{K,r} - R_{K,d}
// No sign change over the weight range means the case is infeasible for this
// instance; the endpoint solution is returned with crossing_found = false.
BoundaryWeightResult solve_boundary_weights(const FadingEnsemble& ens, const Budget& budget,
                                            const CaseLabel& label, const SolverConfig& cfg,
                                            const PowerPolicy* warm = nullptr);

struct GradientResult {
  PowerPolicy policy;
  std::vector<double> trace;
  bool converged = false;
  int iterations = 0;
};

// Projected gradient ascent over the user columns for a concave objective
// (the SIMO log-det cutset programs). Projection is the per-column
// clip-and-shift onto {P >= 0, mean <= P_bar}; backtracking keeps the trace
// monotone. The relay column is water-filled exactly.
GradientResult projected_gradient_concave(const FadingEnsemble& ens, const Budget& budget,
                                          const CaseObjective& obj, const SolverConfig& cfg,
                                          const PowerPolicy* warm = nullptr);

// Exports a convergence trace as CSV (iteration, objective).
std::string trace_to_csv(const std::vector<double>& trace);

// Scalar root of sum_t a_t / (d_t + s_t x) = c on x > 0 (the ratio-sum
// per-sample KKT equation); 0 when the marginal at 0 is already <= c.
// Closed-form for one or two terms, safeguarded Newton otherwise.
double ratio_sum_root(const std::vector<double>& a, const std::vector<double>& d,
                      const std::vector<double>& s, double c);

}  // namespace marc
