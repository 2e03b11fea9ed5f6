#pragma once

#include <memory>
#include <string>
#include <vector>

#include "marc/iterative.hpp"
#include "marc/rate_bounds.hpp"

namespace marc {

// Tolerance bands for classifying the case conditions: comparisons within
// eq_tol * scale count as equalities (the boundary band); strict inequalities
// need a margin beyond the band. scale = max(1, sum-rate bounds).
struct CaseTolerance {
  double eq_tol = 1e-6;
  double strict_tol = 1e-9;
};

struct ConditionCheck {
  CaseLabel label;
  bool satisfied = false;
  bool degenerate = false;          // every bound is in the zero band
  std::vector<double> residuals;    // case-specific, documented per kind
  std::string to_string() const;
};

// Evaluates the case-defining inequalities/equalities at the policy behind
// `pair`, via the split values f1(S) + f2(K\S) and the two K-user sum bounds.
ConditionCheck check_case_conditions(const RateRegionPair& pair, const CaseLabel& label,
                                     double tol = CaseTolerance{}.eq_tol);

struct SolverReport {
  PowerPolicy policy;
  CaseLabel label;
  double sum_rate = 0;  // Lemma-1 value at the accepted policy
  DualVariables duals;
  std::vector<ConditionCheck> conditions_checked;
  int iterations = 0;   // inner sweeps/gradient steps across all case solves
  int cases_tried = 0;
  double kkt_residual = 0;    // max over samples/transmitters at acceptance
  double power_residual = 0;  // max relative average-power mismatch (bound users)
  bool degenerate = false;

  std::string to_text() const;  // flat "key: value" lines
};

struct CaseSweepError : std::runtime_error {
  CaseSweepError(const std::string& what, std::vector<ConditionCheck> checks)
      : std::runtime_error(what), checks(std::move(checks)) {}
  std::vector<ConditionCheck> checks;
};

// Sequential optimal-policy algorithm: solve the 2^K-2 inactive cases, the
// 3(2^K-2) boundary cases, then 3a, 3b, 3c, accepting the first case whose
// optimal policy satisfies its own conditions.
SolverReport optimal_df_sum_rate(std::shared_ptr<const FadingEnsemble> ens, const Budget& budget,
                                 const SolverConfig& cfg);

// Same sweep over the cutset outer-bound pair; SIMO-dominated objectives are
// solved by projected gradient, case 3b by the DF destination solver. An
// optional warm policy (e.g. the DF optimum) seeds the gradient solves.
SolverReport optimal_cutset_sum_rate(std::shared_ptr<const FadingEnsemble> ens,
                                     const Budget& budget, const SolverConfig& cfg,
                                     const PowerPolicy* warm = nullptr);

struct WeightedReport {
  double r1 = 0, r2 = 0;
  double value = 0;
  SolverReport report;
  bool experimental_subcase = false;  // equal-rate sub-case of case 3a/3b
};

// K = 2 weighted rate-region solver: maximizes mu1 R1 + mu2 R2 by the case
// sweep with the Section-V vertex objectives; mu1 = mu2 reduces to the
// sum-rate solver.
WeightedReport optimal_df_weighted_region_2user(std::shared_ptr<const FadingEnsemble> ens,
                                                const Budget& budget, double mu1, double mu2,
                                                const SolverConfig& cfg);

// Corner point of a clustered inactive case: users in S successively decoded
// at the first receiver, K\S at the destination; position 1 of each
// permutation is decoded last. Returns the K per-user rates.
std::vector<double> kuser_clustered_corner_rates(const RateRegionPair& pair, SubsetMask s,
                                                 const std::vector<int>& perm_s,
                                                 const std::vector<int>& perm_comp);

struct CertificateResult {
  bool achieved = false;
  double gap = 0;  // ob.sum_rate - df.sum_rate when not achieved
};

// Sum-capacity test: DF meets the cutset bound iff the outer-bound optimum is
// case 3b and the two sum-rates agree within tol.
CertificateResult sum_capacity_certificate(const SolverReport& df, const SolverReport& ob,
                                           double tol);

// All case labels of one family in the sequential solve order.
std::vector<CaseLabel> case_sweep_order(int k, BoundFamily family);

}  // namespace marc
