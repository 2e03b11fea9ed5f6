#pragma once

#include <string>
#include <vector>

#include "marc/case_label.hpp"
#include "marc/subsets.hpp"

namespace marc {

// Real-valued set function on subsets of {1..K} with f(empty) = 0 structural.
// Houses the multiaccess rate bounds whose polyhedra are polymatroids.
class SetFunction {
 public:
  explicit SetFunction(int k);

  int user_count() const { return k_; }

  double operator()(SubsetMask s) const { return values_[s]; }
  void set(SubsetMask s, double v);

  // Flat text form, one "mask: value" line per nonempty subset.
  std::string to_text() const;
  static SetFunction from_text(const std::string& text);

 private:
  int k_;
  std::vector<double> values_;  // indexed by mask, values_[0] == 0
};

struct PolymatroidViolation {
  enum class Kind { Negative, Monotonicity, Submodularity };
  Kind kind;
  SubsetMask set;   // the witnessing base set S
  int k1 = 0;       // element(s) involved
  int k2 = 0;
  std::string to_string() const;
};

struct PolymatroidCheck {
  bool ok = true;
  std::vector<PolymatroidViolation> violations;
};

// Normalization, monotonicity and (pairwise) submodularity within tol.
PolymatroidCheck check_polymatroid(const SetFunction& f, double tol);

struct IntersectionVerdict {
  double max_sum = 0;
  // Minimizer S of f1(S) + f2(K\S) over all S (empty and full included);
  // ties broken by smallest cardinality, then lexicographic.
  SubsetMask argmin_subset = 0;
  CaseLabel label;
  bool f1_sum_active = false;  // f1(K) equals max_sum within tolerance
  bool f2_sum_active = false;
};

// Lemma on intersecting polymatroids: max sum-rate over the intersection of
// {R_S <= f1(S)} and {R_S <= f2(S)} equals min_S f1(S) + f2(K\S).
// Boundary detection uses a relative tolerance band of 1e-9.
IntersectionVerdict intersect_max_sum(const SetFunction& f1, const SetFunction& f2);

// The K! corner points of the polymatroid {R_S <= f(S)}: for a decoding
// permutation pi, R_{pi(j)} = f(pi(1..j)) - f(pi(1..j-1)). Position 1 is the
// user decoded last (interference-free).
std::vector<std::vector<double>> enumerate_vertices(const SetFunction& f);

struct WeightedOptimum {
  std::vector<double> rates;
  double value = 0;
};

// Maximize sum_k mu_k R_k over {R >= 0, R_S <= min(f1(S), f2(S))} by vertex
// enumeration of the halfspace system. K <= 4.
WeightedOptimum max_weighted_sum_on_intersection(const SetFunction& f1,
                                                 const SetFunction& f2,
                                                 const std::vector<double>& mu);

}  // namespace marc
