#pragma once

#include <vector>

#include "marc/power_policy.hpp"
#include "marc/rate_bounds.hpp"

namespace marc {

// One additive piece of a per-case optimization objective (ergodic rates, bits):
//   SourceMac:   weight * E[ theta C( sum_{k in users} g_{recv,k} P_k / theta ) ]
//   RelayLink:   weight * E[ (1-theta) C( g_dr P_r / (1-theta) ) ]
//   SimoLogDet:  weight * E[ theta log2 det( I_2 + sum_{k in users} G_k P_k / theta ) ]
struct ObjectiveTerm {
  enum class Kind { SourceMac, RelayLink, SimoLogDet };
  Kind kind = Kind::SourceMac;
  double weight = 1.0;
  Side receiver = Side::First;  // for SourceMac: First = relay, Second = destination
  SubsetMask users = 0;
};

// A case's Lagrangian-weighted rate objective. All the DF and cutset case
// programs (inactive, active, boundary mixtures, weighted-region vertices)
// are instances of this form.
struct CaseObjective {
  std::vector<ObjectiveTerm> terms;

  double relay_weight() const;          // total weight on the relay-link term
  bool has_logdet() const;              // needs the gradient solver
  bool involves_user(int user) const;   // user appears in some positive-weight term
};

double objective_value(const CaseObjective& obj, const FadingEnsemble& ens,
                       const PowerPolicy& policy, double theta);

// Per-sample KKT marginal f_u(i) = dJ/dP_u(i) * n * ln2 for ratio (non-logdet)
// terms, evaluated at the current policy. The KKT system is f_u <= nu_u ln2
// with equality where P_u > 0.
double user_marginal(const CaseObjective& obj, const FadingEnsemble& ens,
                     const PowerPolicy& policy, double theta, int user, int i);

// Full-policy gradient of the objective w.r.t. the K user columns (relay
// column excluded; it is solved exactly by water-filling). grad has the same
// column-major layout as PowerPolicy user columns, length n*K.
void user_gradient(const CaseObjective& obj, const FadingEnsemble& ens, const PowerPolicy& policy,
                   double theta, std::vector<double>& grad);

}  // namespace marc
