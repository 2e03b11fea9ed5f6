#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "marc/power_policy.hpp"
#include "marc/set_function.hpp"

namespace marc {

enum class Side { First, Second };  // relay/SIMO bound vs destination bound

// The two rate polymatroids realized by a fixed policy on a fixed ensemble:
// DF family:     f1(S) = E[ theta C(sum_{k in S} |H_rk|^2 P_k / theta) ]
//                f2(S) = E[ theta C(sum_{k in S} |H_dk|^2 P_k / theta)
//                           + (1-theta) C(|H_dr|^2 P_r / (1-theta)) ]
// Cutset family: f1(S) = E[ theta log2 det(I_2 + sum_{k in S} G_k P_k/theta) ]
//                f2(S) as above.
// C(x) = log2(1+x). Subset values are computed lazily and cached.
class RateRegionPair {
 public:
  RateRegionPair(std::shared_ptr<const FadingEnsemble> ens, PowerPolicy policy, double theta,
                 BoundFamily family);

  int user_count() const { return ens_->user_count(); }
  BoundFamily family() const { return family_; }
  const PowerPolicy& policy() const { return policy_; }

  double f1(SubsetMask s) const;
  double f2(SubsetMask s) const;
  double value(Side side, SubsetMask s) const { return side == Side::First ? f1(s) : f2(s); }

  SetFunction materialize_f1() const;
  SetFunction materialize_f2() const;

 private:
  double compute(Side side, SubsetMask s) const;

  std::shared_ptr<const FadingEnsemble> ens_;
  PowerPolicy policy_;
  double theta_;
  BoundFamily family_;
  mutable std::vector<std::optional<double>> cache1_, cache2_;
};

RateRegionPair df_bounds(std::shared_ptr<const FadingEnsemble> ens, const PowerPolicy& policy,
                         const Budget& budget);
RateRegionPair cutset_bounds(std::shared_ptr<const FadingEnsemble> ens, const PowerPolicy& policy,
                             const Budget& budget);

// Rate of the users in S when K\S is decoded first at the given receiver:
// f_j(K) - f_j(K\S).
double successive_min_rate(const RateRegionPair& pair, SubsetMask s, Side receiver);

}  // namespace marc
