#pragma once

#include <bit>
#include <string>
#include <vector>

namespace marc {

// Subsets of the user set {1..K} as bitmasks: bit (k-1) set <=> user k in S.
using SubsetMask = unsigned;

constexpr int kMaxUsers = 6;

inline SubsetMask full_mask(int k) { return (SubsetMask{1} << k) - 1u; }

inline int subset_size(SubsetMask s) { return std::popcount(s); }

inline bool contains(SubsetMask s, int user) { return (s >> (user - 1)) & 1u; }

std::vector<int> subset_elements(SubsetMask s);

std::string subset_to_string(SubsetMask s);

// Orders subsets by cardinality, then lexicographically by the ascending
// element sequence ({1,4} before {2,3}). Used for deterministic tie-breaks
// and case enumeration order.
bool subset_precedes(SubsetMask a, SubsetMask b);

// All nonempty proper subsets of {1..K}, in subset_precedes order.
std::vector<SubsetMask> proper_subsets_ordered(int k);

}  // namespace marc
