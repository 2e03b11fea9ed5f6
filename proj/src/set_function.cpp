#include "marc/set_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace marc {

std::vector<int> subset_elements(SubsetMask s) {
  std::vector<int> out;
  for (int k = 1; s; ++k, s >>= 1)
    if (s & 1u) out.push_back(k);
  return out;
}

std::string subset_to_string(SubsetMask s) {
  std::string out = "{";
  bool first = true;
  for (int e : subset_elements(s)) {
    if (!first) out += ",";
    out += std::to_string(e);
    first = false;
  }
  return out + "}";
}

bool subset_precedes(SubsetMask a, SubsetMask b) {
  if (a == b) return false;
  int ca = subset_size(a), cb = subset_size(b);
  if (ca != cb) return ca < cb;
  // lexicographic on ascending element sequences
  while (a && b) {
    int ea = std::countr_zero(a), eb = std::countr_zero(b);
    if (ea != eb) return ea < eb;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0;
}

std::vector<SubsetMask> proper_subsets_ordered(int k) {
  std::vector<SubsetMask> out;
  for (SubsetMask s = 1; s < full_mask(k); ++s) out.push_back(s);
  std::sort(out.begin(), out.end(), subset_precedes);
  return out;
}

std::string active_kind_name(ActiveKind a) {
  switch (a) {
    case ActiveKind::A3a: return "3a";
    case ActiveKind::A3b: return "3b";
    case ActiveKind::A3c: return "3c";
  }
  return "?";
}

std::string CaseLabel::to_string() const {
  switch (kind) {
    case Kind::Inactive: return "inactive" + subset_to_string(subset);
    case Kind::Active: return "active" + active_kind_name(active);
    case Kind::Boundary:
      return "boundary(" + subset_to_string(subset) + "," + active_kind_name(active) + ")";
  }
  return "?";
}

SetFunction::SetFunction(int k) : k_(k) {
  if (k < 1 || k > kMaxUsers) throw std::invalid_argument("SetFunction: K out of range");
  values_.assign(std::size_t{1} << k, 0.0);
}

void SetFunction::set(SubsetMask s, double v) {
  if (s == 0 || s > full_mask(k_)) throw std::invalid_argument("SetFunction::set: bad subset");
  if (!std::isfinite(v) || v < 0) throw std::invalid_argument("SetFunction::set: value must be finite and >= 0");
  values_[s] = v;
}

std::string SetFunction::to_text() const {
  std::ostringstream os;
  os.precision(17);
  for (SubsetMask s = 1; s <= full_mask(k_); ++s) os << s << ": " << values_[s] << "\n";
  return os.str();
}

SetFunction SetFunction::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::pair<SubsetMask, double>> entries;
  SubsetMask maxmask = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("SetFunction::from_text: missing ':'");
    SubsetMask s = static_cast<SubsetMask>(std::stoul(line.substr(0, colon)));
    double v = std::stod(line.substr(colon + 1));
    entries.emplace_back(s, v);
    maxmask = std::max(maxmask, s);
  }
  int k = std::bit_width(maxmask);
  if (k == 0) throw std::invalid_argument("SetFunction::from_text: empty");
  SetFunction f(k);
  for (auto& [s, v] : entries) f.set(s, v);
  return f;
}

std::string PolymatroidViolation::to_string() const {
  switch (kind) {
    case Kind::Negative:
      return "negative value at " + subset_to_string(set);
    case Kind::Monotonicity:
      return "monotonicity: f(" + subset_to_string(set) + ") > f(" +
             subset_to_string(set | (1u << (k1 - 1))) + ")";
    case Kind::Submodularity:
      return "submodularity at (" + subset_to_string(set) + "," + std::to_string(k1) + "," +
             std::to_string(k2) + ")";
  }
  return "?";
}

PolymatroidCheck check_polymatroid(const SetFunction& f, double tol) {
  PolymatroidCheck out;
  const int k = f.user_count();
  const SubsetMask full = full_mask(k);
  for (SubsetMask s = 1; s <= full; ++s) {
    if (f(s) < -tol) {
      out.ok = false;
      out.violations.push_back({PolymatroidViolation::Kind::Negative, s, 0, 0});
    }
  }
  // single-element monotonicity steps imply the general S subset-of P form
  for (SubsetMask s = 0; s <= full; ++s) {
    for (int u = 1; u <= k; ++u) {
      if (contains(s, u)) continue;
      SubsetMask t = s | (1u << (u - 1));
      if (f(s) > f(t) + tol) {
        out.ok = false;
        out.violations.push_back({PolymatroidViolation::Kind::Monotonicity, s, u, 0});
      }
    }
  }
  // pairwise form: f(S+k1) + f(S+k2) >= f(S) + f(S+k1+k2)
  for (SubsetMask s = 0; s <= full; ++s) {
    for (int u1 = 1; u1 <= k; ++u1) {
      if (contains(s, u1)) continue;
      for (int u2 = u1 + 1; u2 <= k; ++u2) {
        if (contains(s, u2)) continue;
        SubsetMask a = s | (1u << (u1 - 1));
        SubsetMask b = s | (1u << (u2 - 1));
        if (f(a) + f(b) < f(s) + f(a | b) - tol) {
          out.ok = false;
          out.violations.push_back({PolymatroidViolation::Kind::Submodularity, s, u1, u2});
        }
      }
    }
  }
  return out;
}

IntersectionVerdict intersect_max_sum(const SetFunction& f1, const SetFunction& f2) {
  if (f1.user_count() != f2.user_count())
    throw std::invalid_argument("intersect_max_sum: user count mismatch");
  const int k = f1.user_count();
  const SubsetMask full = full_mask(k);

  IntersectionVerdict v;
  v.max_sum = std::numeric_limits<double>::infinity();
  for (SubsetMask s = 0; s <= full; ++s) {
    double sum = f1(s) + f2(full & ~s);
    if (sum < v.max_sum) {
      v.max_sum = sum;
      v.argmin_subset = s;
    } else if (sum == v.max_sum && subset_precedes(s, v.argmin_subset)) {
      v.argmin_subset = s;
    }
  }

  const double tol = 1e-9 * std::max(1.0, std::abs(v.max_sum));
  v.f1_sum_active = f1(full) <= v.max_sum + tol;
  v.f2_sum_active = f2(full) <= v.max_sum + tol;
  bool interior_tie = false;
  SubsetMask interior_argmin = 0;
  for (SubsetMask s = 1; s < full; ++s) {
    double sum = f1(s) + f2(full & ~s);
    if (sum <= v.max_sum + tol) {
      if (!interior_tie || subset_precedes(s, interior_argmin)) interior_argmin = s;
      interior_tie = true;
    }
  }

  if (!v.f1_sum_active && !v.f2_sum_active) {
    v.label = CaseLabel::make_inactive(interior_argmin);
  } else {
    ActiveKind a = v.f1_sum_active && v.f2_sum_active ? ActiveKind::A3c
                   : v.f1_sum_active                  ? ActiveKind::A3a
                                                      : ActiveKind::A3b;
    v.label = interior_tie ? CaseLabel::make_boundary(interior_argmin, a) : CaseLabel::make_active(a);
  }
  return v;
}

std::vector<std::vector<double>> enumerate_vertices(const SetFunction& f) {
  const int k = f.user_count();
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<std::vector<double>> out;
  do {
    std::vector<double> rates(k);
    SubsetMask acc = 0;
    for (int j = 0; j < k; ++j) {
      SubsetMask next = acc | (1u << (perm[j] - 1));
      rates[perm[j] - 1] = f(next) - f(acc);
      acc = next;
    }
    out.push_back(std::move(rates));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

namespace {

// One halfspace a.R <= b over R^k; the constraint rows are subset indicators.
struct Halfspace {
  SubsetMask mask;  // sum over users in mask ...
  double sign;      // +1: sum <= bound; for R_k >= 0 rows use single bit, sign -1, bound 0
  double bound;
};

bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 1e-12;
    for (int r = col; r < n; ++r)
      if (std::abs(a[r][col]) > best) { best = std::abs(a[r][col]); piv = r; }
    if (piv < 0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double m = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

}  // namespace

WeightedOptimum max_weighted_sum_on_intersection(const SetFunction& f1,
                                                 const SetFunction& f2,
                                                 const std::vector<double>& mu) {
  if (f1.user_count() != f2.user_count())
    throw std::invalid_argument("max_weighted_sum_on_intersection: user count mismatch");
  const int k = f1.user_count();
  if (static_cast<int>(mu.size()) != k)
    throw std::invalid_argument("max_weighted_sum_on_intersection: weight dimension");
  for (double m : mu)
    if (!(m > 0)) throw std::invalid_argument("max_weighted_sum_on_intersection: weights must be > 0");
  if (k > 4) throw std::invalid_argument("max_weighted_sum_on_intersection: K <= 4");

  const SubsetMask full = full_mask(k);
  std::vector<Halfspace> rows;
  for (SubsetMask s = 1; s <= full; ++s) {
    rows.push_back({s, +1.0, f1(s)});
    rows.push_back({s, +1.0, f2(s)});
  }
  for (int u = 0; u < k; ++u) rows.push_back({1u << u, -1.0, 0.0});

  const int m = static_cast<int>(rows.size());
  WeightedOptimum best;
  best.value = -1.0;
  best.rates.assign(k, 0.0);

  std::vector<int> idx(k);
  // all k-combinations of constraint rows
  std::vector<int> comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  auto advance = [&]() {
    int i = k - 1;
    while (i >= 0 && comb[i] == m - k + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    return true;
  };
  do {
    std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k);
    for (int r = 0; r < k; ++r) {
      const Halfspace& h = rows[comb[r]];
      for (int c = 0; c < k; ++c) a[r][c] = contains(h.mask, c + 1) ? h.sign : 0.0;
      b[r] = h.sign > 0 ? h.bound : 0.0;
    }
    std::vector<double> x;
    if (!solve_square(a, b, x)) continue;
    bool feasible = true;
    for (const Halfspace& h : rows) {
      double lhs = 0;
      for (int c = 0; c < k; ++c)
        if (contains(h.mask, c + 1)) lhs += x[c];
      lhs *= h.sign;
      double rhs = h.sign > 0 ? h.bound : 0.0;
      if (lhs > rhs + 1e-9 * std::max(1.0, std::abs(rhs))) { feasible = false; break; }
    }
    if (!feasible) continue;
    double val = 0;
    for (int c = 0; c < k; ++c) val += mu[c] * x[c];
    if (val > best.value) {
      best.value = val;
      best.rates = x;
    }
  } while (advance());

  if (best.value < 0) {  // origin is always feasible
    best.value = 0;
    best.rates.assign(k, 0.0);
  }
  return best;
}

}  // namespace marc
