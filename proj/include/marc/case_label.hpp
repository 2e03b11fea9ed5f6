#pragma once

#include <string>

#include "marc/subsets.hpp"

namespace marc {

enum class BoundFamily { DF, Cutset };

enum class ActiveKind { A3a, A3b, A3c };

// Label for a polymatroid-intersection case.
//
// Inactive(S): the split f1(S) + f2(K\S) is strictly below both K-user
// sum-rate planes; users in S decode at the first receiver (relay / SIMO cut)
// and K\S at the destination.
// Active 3a/3b/3c: the sum-rate plane at the first receiver is below / above /
// equal to the one at the destination.
// Boundary(S, n): a split ties the dominant sum-rate plane of active case n.
struct CaseLabel {
  enum class Kind { Inactive, Active, Boundary };

  Kind kind = Kind::Active;
  ActiveKind active = ActiveKind::A3a;  // for Active and Boundary
  SubsetMask subset = 0;                // for Inactive and Boundary
  BoundFamily family = BoundFamily::DF;

  static CaseLabel make_inactive(SubsetMask s, BoundFamily f = BoundFamily::DF) {
    return {Kind::Inactive, ActiveKind::A3a, s, f};
  }
  static CaseLabel make_active(ActiveKind a, BoundFamily f = BoundFamily::DF) {
    return {Kind::Active, a, 0, f};
  }
  static CaseLabel make_boundary(SubsetMask s, ActiveKind a, BoundFamily f = BoundFamily::DF) {
    return {Kind::Boundary, a, s, f};
  }

  bool operator==(const CaseLabel& o) const {
    if (kind != o.kind || family != o.family) return false;
    switch (kind) {
      case Kind::Inactive: return subset == o.subset;
      case Kind::Active: return active == o.active;
      case Kind::Boundary: return subset == o.subset && active == o.active;
    }
    return false;
  }

  std::string to_string() const;
};

std::string active_kind_name(ActiveKind a);

}  // namespace marc
