#include "marc/iterative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace marc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double ratio_sum_eval(const std::vector<double>& a, const std::vector<double>& d,
                      const std::vector<double>& s, double x) {
  double f = 0;
  for (std::size_t t = 0; t < a.size(); ++t) f += a[t] / (d[t] + s[t] * x);
  return f;
}

double ratio_sum_slope(const std::vector<double>& a, const std::vector<double>& d,
                       const std::vector<double>& s, double x) {
  double f = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    double den = d[t] + s[t] * x;
    f -= a[t] * s[t] / (den * den);
  }
  return f;
}

double newton_polish(const std::vector<double>& a, const std::vector<double>& d,
                     const std::vector<double>& s, double c, double x) {
  for (int it = 0; it < 2; ++it) {
    double fp = ratio_sum_slope(a, d, s, x);
    if (fp == 0) break;
    double step = (ratio_sum_eval(a, d, s, x) - c) / fp;
    double next = x - step;
    if (!(next > 0) || !std::isfinite(next)) break;
    x = next;
  }
  return std::max(0.0, x);
}

}  // namespace

double ratio_sum_root(const std::vector<double>& a_in, const std::vector<double>& d_in,
                      const std::vector<double>& s_in, double c) {
  // drop dead terms
  std::vector<double> a, d, s;
  for (std::size_t t = 0; t < a_in.size(); ++t) {
    if (a_in[t] > 0 && s_in[t] > 0) {
      a.push_back(a_in[t]);
      d.push_back(d_in[t]);
      s.push_back(s_in[t]);
    }
  }
  if (a.empty() || !(c > 0)) return 0.0;
  if (ratio_sum_eval(a, d, s, 0.0) <= c) return 0.0;

  if (a.size() == 1) {
    double x = (a[0] / c - d[0]) / s[0];
    return std::max(0.0, x);
  }

  if (a.size() == 2) {
    const double A = c * s[0] * s[1];
    const double B = c * (d[0] * s[1] + d[1] * s[0]) - (a[0] * s[1] + a[1] * s[0]);
    const double C = c * d[0] * d[1] - a[0] * d[1] - a[1] * d[0];  // < 0 since f(0) > c
    double x;
    if (A > 1e-14 * std::max({std::abs(B), std::abs(C), 1.0})) {
      double disc = std::sqrt(std::max(0.0, B * B - 4 * A * C));
      x = B <= 0 ? (-B + disc) / (2 * A) : -2 * C / (B + disc);
    } else {
      // nearly linear
      x = B != 0 ? -C / B : 0.0;
    }
    return newton_polish(a, d, s, c, std::max(x, 0.0));
  }

  // three or more ratio terms: bracketed Newton on the decreasing function
  double hi = 1.0;
  while (ratio_sum_eval(a, d, s, hi) > c) {
    hi *= 4;
    if (hi > 1e30) break;
  }
  double lo = 0.0;
  double x = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    double f = ratio_sum_eval(a, d, s, x) - c;
    if (f > 0) lo = x; else hi = x;
    double fp = ratio_sum_slope(a, d, s, x);
    double nx = fp != 0 ? x - f / fp : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 1e-15 * std::max(1.0, x)) { x = nx; break; }
    x = nx;
  }
  return std::max(0.0, x);
}

namespace {

// Per-sample ratio-term tables for one user's coordinate update: the KKT
// marginal of user u at sample i is sum_t a[t][i] / (d[t][i] + s[t][i] x).
struct UserTermTables {
  std::vector<std::vector<double>> a, d, s;
  int n = 0;
};

UserTermTables build_user_tables(const CaseObjective& obj, const FadingEnsemble& ens,
                                 const PowerPolicy& policy, double theta, int user) {
  UserTermTables tab;
  const int n = ens.sample_count();
  const int k = ens.user_count();
  tab.n = n;
  for (const auto& t : obj.terms) {
    if (t.kind != ObjectiveTerm::Kind::SourceMac || t.weight <= 0 || !contains(t.users, user))
      continue;
    std::vector<double> a(n), d(n), s(n);
    for (int i = 0; i < n; ++i) {
      double g = t.receiver == Side::First ? ens.g_relay(user, i) : ens.g_dest(user, i);
      double base = 0;
      for (int u = 1; u <= k; ++u) {
        if (u == user || !contains(t.users, u)) continue;
        base += (t.receiver == Side::First ? ens.g_relay(u, i) : ens.g_dest(u, i)) *
                policy(i, u - 1);
      }
      a[i] = t.weight * g;
      d[i] = 1 + base / theta;
      s[i] = g / theta;
    }
    tab.a.push_back(std::move(a));
    tab.d.push_back(std::move(d));
    tab.s.push_back(std::move(s));
  }
  return tab;
}

// Average power spent by the user at dual nu, and the per-sample powers.
double user_avg_power(const UserTermTables& tab, double nu, std::vector<double>* powers) {
  const double c = nu * kLn2;
  const std::size_t nt = tab.a.size();
  std::vector<double> a(nt), d(nt), s(nt);
  double total = 0;
  for (int i = 0; i < tab.n; ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      a[t] = tab.a[t][i];
      d[t] = tab.d[t][i];
      s[t] = tab.s[t][i];
    }
    double p = ratio_sum_root(a, d, s, c);
    if (powers) (*powers)[i] = p;
    total += p;
  }
  return total / tab.n;
}

// Illinois false-position for g(nu) = avg_power(nu) - p_bar, decreasing,
// g(lo) >= 0 >= g(hi).
double solve_user_dual(const UserTermTables& tab, double p_bar, double start) {
  auto g = [&](double nu) { return user_avg_power(tab, nu, nullptr) - p_bar; };
  double lo = start > 0 ? start : 1.0, hi = lo;
  double glo = g(lo);
  while (glo < 0 && lo > 1e-18) {
    lo /= 8;
    glo = g(lo);
  }
  double ghi = g(hi);
  while (ghi > 0 && hi < 1e18) {
    hi *= 8;
    ghi = g(hi);
  }
  if (glo < 0) return lo;   // cannot spend the budget (dead channel handled upstream)
  if (ghi > 0) return hi;
  const double gtol = 1e-13 * std::max(1.0, p_bar);
  double flo = glo, fhi = ghi;
  double x = lo;
  for (int it = 0; it < 120; ++it) {
    x = (flo != fhi) ? (lo * fhi - hi * flo) / (fhi - flo) : 0.5 * (lo + hi);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    double fx = g(x);
    if (std::abs(fx) <= gtol || (hi - lo) <= 1e-15 * hi) return x;
    if (fx > 0) {
      lo = x;
      flo = fx;
      fhi *= 0.5;  // Illinois scaling on the stale side
    } else {
      hi = x;
      fhi = fx;
      flo *= 0.5;
    }
  }
  return x;
}

}  // namespace

IterativeResult solve_iterative(const FadingEnsemble& ens, const Budget& budget,
                                const CaseObjective& obj, const SolverConfig& cfg,
                                const PowerPolicy* warm) {
  budget.validate();
  const int n = ens.sample_count();
  const int k = ens.user_count();
  if (budget.user_count() != k) throw std::invalid_argument("solve_iterative: budget dimension");
  if (obj.has_logdet())
    throw std::invalid_argument("solve_iterative: log-det terms need the gradient solver");

  IterativeResult out;
  out.policy = PowerPolicy(n, k);
  if (warm && warm->sample_count() == n && warm->user_count() == k) out.policy = *warm;
  out.duals.nu.assign(k + 1, 0.0);
  out.zero_channel.assign(k, false);

  // relay: water-filling on its direct link at full budget, independent of the
  // case weight (the weight only rescales the reported dual)
  std::vector<double> g_dr(n);
  for (int i = 0; i < n; ++i) g_dr[i] = ens.g_relay_dest(i);
  auto relay = waterfill_single(g_dr, 1.0 - budget.theta, budget.relay_power(), cfg);
  for (int i = 0; i < n; ++i) out.policy.at(i, k) = relay.powers[i];
  out.duals.nu[k] = obj.relay_weight() * relay.nu;

  // users with no positive-gain term anywhere stay silent
  std::vector<bool> live(k, false);
  for (int u = 1; u <= k; ++u) {
    if (budget.source_power(u) <= 0 || !obj.involves_user(u)) {
      for (int i = 0; i < n; ++i) out.policy.at(i, u - 1) = 0;
      continue;
    }
    bool any = false;
    for (const auto& t : obj.terms) {
      if (t.kind != ObjectiveTerm::Kind::SourceMac || t.weight <= 0 || !contains(t.users, u))
        continue;
      for (int i = 0; i < n && !any; ++i)
        any = (t.receiver == Side::First ? ens.g_relay(u, i) : ens.g_dest(u, i)) > 0;
      if (any) break;
    }
    if (!any) {
      out.zero_channel[u - 1] = true;
      for (int i = 0; i < n; ++i) out.policy.at(i, u - 1) = 0;
      continue;
    }
    live[u - 1] = true;
  }

  double prev = objective_value(obj, ens, out.policy, budget.theta);
  out.trace.push_back(prev);
  std::vector<double> powers(n);
  std::vector<double> nu_start(k, 1.0);
  const int max_sweeps = cfg.max_iters;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int u = 1; u <= k; ++u) {
      if (!live[u - 1]) continue;
      UserTermTables tab = build_user_tables(obj, ens, out.policy, budget.theta, u);
      double nu = solve_user_dual(tab, budget.source_power(u), nu_start[u - 1]);
      nu_start[u - 1] = nu;
      out.duals.nu[u - 1] = nu;
      user_avg_power(tab, nu, &powers);
      for (int i = 0; i < n; ++i) out.policy.at(i, u - 1) = powers[i];
    }
    double cur = objective_value(obj, ens, out.policy, budget.theta);
    out.trace.push_back(cur);
    out.sweeps = sweep + 1;
    if (std::abs(cur - prev) <= cfg.iter_tol * std::max(1.0, std::abs(cur))) {
      out.converged = true;
      break;
    }
    prev = cur;
  }
  return out;
}

CaseObjective df_case_objective(const CaseLabel& label, int k, const std::vector<double>& weights) {
  const SubsetMask full = full_mask(k);
  using K = ObjectiveTerm::Kind;
  CaseObjective obj;
  auto mac = [&](Side side, SubsetMask users, double w) {
    if (w > 0 && users) obj.terms.push_back({K::SourceMac, w, side, users});
  };
  auto relay = [&](double w) {
    if (w > 0) obj.terms.push_back({K::RelayLink, w, Side::Second, 0});
  };
  auto inactive_terms = [&](SubsetMask s, double w) {
    mac(Side::First, s, w);
    mac(Side::Second, full & ~s, w);
    relay(w);
  };

  switch (label.kind) {
    case CaseLabel::Kind::Inactive:
      inactive_terms(label.subset, 1.0);
      break;
    case CaseLabel::Kind::Active:
      switch (label.active) {
        case ActiveKind::A3a:
          mac(Side::First, full, 1.0);
          break;
        case ActiveKind::A3b:
          mac(Side::Second, full, 1.0);
          relay(1.0);
          break;
        case ActiveKind::A3c: {
          if (weights.size() != 1) throw std::invalid_argument("case 3c needs one weight");
          double alpha = weights[0];  // alpha multiplies the relay-side sum-rate
          mac(Side::First, full, alpha);
          mac(Side::Second, full, 1 - alpha);
          relay(1 - alpha);
          break;
        }
      }
      break;
    case CaseLabel::Kind::Boundary: {
      if (label.active != ActiveKind::A3c) {
        if (weights.size() != 1) throw std::invalid_argument("boundary case needs one weight");
        double alpha = weights[0];  // alpha multiplies the inactive side
        inactive_terms(label.subset, alpha);
        if (label.active == ActiveKind::A3a) {
          mac(Side::First, full, 1 - alpha);
        } else {
          mac(Side::Second, full, 1 - alpha);
          relay(1 - alpha);
        }
      } else {
        if (weights.size() != 2) throw std::invalid_argument("boundary (l,3c) needs two weights");
        double a1 = weights[0], a2 = weights[1];
        inactive_terms(label.subset, a1);
        mac(Side::First, full, a2);
        mac(Side::Second, full, 1 - a1 - a2);
        relay(1 - a1 - a2);
      }
      break;
    }
  }
  return obj;
}

CaseObjective cutset_case_objective(const CaseLabel& label, int k,
                                    const std::vector<double>& weights) {
  CaseObjective obj = df_case_objective(label, k, weights);
  // the first-receiver bound is the SIMO cut, not the relay MAC
  for (auto& t : obj.terms)
    if (t.kind == ObjectiveTerm::Kind::SourceMac && t.receiver == Side::First)
      t.kind = ObjectiveTerm::Kind::SimoLogDet;
  return obj;
}

namespace {

// Sum-rate components entering the boundary residuals.
struct CaseRates {
  double r_first;   // K-user sum bound at the relay (DF) or SIMO cut (cutset)
  double r_second;  // K-user sum bound at the destination (incl. relay link)
  double split;     // f1(S) + f2(K\S) for the label's subset (0 if none)
};

CaseRates case_rates(const FadingEnsemble& ens, const Budget& budget, const PowerPolicy& policy,
                     const CaseLabel& label) {
  const int k = ens.user_count();
  const SubsetMask full = full_mask(k);
  const bool cut = label.family == BoundFamily::Cutset;
  using K = ObjectiveTerm::Kind;
  auto first_term = [&](SubsetMask users) {
    return ObjectiveTerm{cut ? K::SimoLogDet : K::SourceMac, 1.0, Side::First, users};
  };
  CaseObjective first{{first_term(full)}};
  CaseObjective second{{{K::SourceMac, 1.0, Side::Second, full}, {K::RelayLink, 1.0, Side::Second, 0}}};
  CaseRates out{};
  out.r_first = objective_value(first, ens, policy, budget.theta);
  out.r_second = objective_value(second, ens, policy, budget.theta);
  if (label.kind == CaseLabel::Kind::Boundary || label.kind == CaseLabel::Kind::Inactive) {
    CaseObjective split{{first_term(label.subset),
                         {K::SourceMac, 1.0, Side::Second, full & ~label.subset},
                         {K::RelayLink, 1.0, Side::Second, 0}}};
    out.split = objective_value(split, ens, policy, budget.theta);
  }
  return out;
}

struct InnerSolve {
  IterativeResult result;
  int iterations = 0;
};

InnerSolve solve_case_mixture(const FadingEnsemble& ens, const Budget& budget,
                              const CaseLabel& label, const std::vector<double>& weights,
                              const SolverConfig& cfg, const PowerPolicy* warm) {
  CaseObjective obj = label.family == BoundFamily::Cutset
                          ? cutset_case_objective(label, ens.user_count(), weights)
                          : df_case_objective(label, ens.user_count(), weights);
  InnerSolve out;
  if (!obj.has_logdet()) {
    out.result = solve_iterative(ens, budget, obj, cfg, warm);
    out.iterations = out.result.sweeps;
  } else {
    GradientResult g = projected_gradient_concave(ens, budget, obj, cfg, warm);
    out.result.policy = g.policy;
    out.result.trace = g.trace;
    out.result.converged = g.converged;
    out.result.sweeps = g.iterations;
    out.iterations = g.iterations;
    out.result.duals.nu.assign(ens.user_count() + 1, 0.0);
    // approximate user duals from the marginals on positive powers
    for (int u = 1; u <= ens.user_count(); ++u) {
      double best = 0;
      for (int i = 0; i < ens.sample_count(); ++i)
        if (g.policy(i, u - 1) > 0)
          best = std::max(best, user_marginal(obj, ens, g.policy, budget.theta, u, i) / kLn2);
      out.result.duals.nu[u - 1] = best;
    }
  }
  return out;
}

}  // namespace

IterativeResult iterative_nonwf(const FadingEnsemble& ens, const Budget& budget,
                                const std::vector<double>& weights, const CaseLabel& label,
                                const SolverConfig& cfg, const PowerPolicy* warm) {
  const bool boundary_like =
      label.kind == CaseLabel::Kind::Boundary ||
      (label.kind == CaseLabel::Kind::Active && label.active == ActiveKind::A3c);
  if (!boundary_like)
    throw std::invalid_argument("iterative_nonwf: case must be 3c or a boundary case");
  CaseObjective obj = label.family == BoundFamily::Cutset
                          ? cutset_case_objective(label, ens.user_count(), weights)
                          : df_case_objective(label, ens.user_count(), weights);
  if (obj.has_logdet())
    throw std::invalid_argument("iterative_nonwf: cutset log-det cases use the gradient solver");
  IterativeResult out = solve_iterative(ens, budget, obj, cfg, warm);
  out.duals.alpha = weights;
  return out;
}

BoundaryWeightResult solve_boundary_weights(const FadingEnsemble& ens, const Budget& budget,
                                            const CaseLabel& label, const SolverConfig& cfg,
                                            const PowerPolicy* warm) {
  const bool is_3c_active =
      label.kind == CaseLabel::Kind::Active && label.active == ActiveKind::A3c;
  if (!is_3c_active && label.kind != CaseLabel::Kind::Boundary)
    throw std::invalid_argument("solve_boundary_weights: case has no equality condition");

  BoundaryWeightResult out;
  PowerPolicy current_warm;
  const PowerPolicy* warm_ptr = warm;

  auto scale_of = [&](const CaseRates& r) {
    return std::max({1.0, std::abs(r.r_first), std::abs(r.r_second)});
  };

  if (is_3c_active || label.active != ActiveKind::A3c) {
    // single multiplier; residual g(alpha), increasing in alpha
    auto eval = [&](double alpha) {
      InnerSolve sol = solve_case_mixture(ens, budget, label, {alpha}, cfg, warm_ptr);
      current_warm = sol.result.policy;
      warm_ptr = &current_warm;
      CaseRates r = case_rates(ens, budget, sol.result.policy, label);
      double g = is_3c_active ? r.r_first - r.r_second
                              : (label.active == ActiveKind::A3a ? r.split - r.r_first
                                                                 : r.split - r.r_second);
      return std::tuple<double, double, IterativeResult>(g, scale_of(r), std::move(sol.result));
    };
    auto [g0, s0, res0] = eval(0.0);
    if (std::abs(g0) <= cfg.alpha_tol * s0) {
      out.weights = {0.0};
      out.inner = std::move(res0);
      out.residuals = {g0};
      out.crossing_found = true;
      out.inner.duals.alpha = out.weights;
      return out;
    }
    auto [g1, s1, res1] = eval(1.0);
    if (std::abs(g1) <= cfg.alpha_tol * s1) {
      out.weights = {1.0};
      out.inner = std::move(res1);
      out.residuals = {g1};
      out.crossing_found = true;
      out.inner.duals.alpha = out.weights;
      return out;
    }
    if ((g0 > 0) == (g1 > 0)) {  // no sign change: case infeasible here
      bool keep0 = std::abs(g0) <= std::abs(g1);
      out.weights = {keep0 ? 0.0 : 1.0};
      out.inner = keep0 ? std::move(res0) : std::move(res1);
      out.residuals = {keep0 ? g0 : g1};
      out.crossing_found = false;
      out.inner.duals.alpha = out.weights;
      return out;
    }
    double lo = 0.0, hi = 1.0, flo = g0, fhi = g1;
    bool keep0 = std::abs(g0) <= std::abs(g1);
    IterativeResult best = keep0 ? std::move(res0) : std::move(res1);
    double best_g = keep0 ? g0 : g1;
    double best_alpha = keep0 ? 0.0 : 1.0;
    for (int it = 0; it < 80; ++it) {
      double mid = (flo != fhi) ? (lo * fhi - hi * flo) / (fhi - flo) : 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
      auto [gm, sm, resm] = eval(mid);
      if (std::abs(gm) < std::abs(best_g)) {
        best_g = gm;
        best = std::move(resm);
        best_alpha = mid;
      }
      if (std::abs(gm) <= cfg.alpha_tol * sm || (hi - lo) <= 1e-13) break;
      if ((gm > 0) == (fhi > 0)) {
        hi = mid;
        fhi = gm;
        flo *= 0.5;
      } else {
        lo = mid;
        flo = gm;
        fhi *= 0.5;
      }
    }
    out.weights = {best_alpha};
    out.inner = std::move(best);
    out.residuals = {best_g};
    CaseRates r = case_rates(ens, budget, out.inner.policy, label);
    out.crossing_found = std::abs(best_g) <= cfg.alpha_tol * scale_of(r);
    out.inner.duals.alpha = out.weights;
    return out;
  }

  // boundary (l, 3c): two multipliers, nested search.
  // inner: beta with a2 = beta (1 - a1) drives r_first - r_second to zero;
  // outer: a1 drives split - r_first to zero.
  auto inner_solve = [&](double a1) {
    double blo = 0.0, bhi = 1.0;
    auto eval_b = [&](double beta) {
      double a2 = beta * (1 - a1);
      InnerSolve sol = solve_case_mixture(ens, budget, label, {a1, a2}, cfg, warm_ptr);
      current_warm = sol.result.policy;
      warm_ptr = &current_warm;
      CaseRates r = case_rates(ens, budget, sol.result.policy, label);
      return std::tuple<double, CaseRates, IterativeResult>(r.r_first - r.r_second, r,
                                                            std::move(sol.result));
    };
    auto [g0, r0, res0] = eval_b(0.0);
    if (g0 >= 0) return std::tuple<double, double, CaseRates, IterativeResult>(0.0, g0, r0, std::move(res0));
    auto [g1, r1, res1] = eval_b(1.0);
    if (g1 <= 0) return std::tuple<double, double, CaseRates, IterativeResult>(1.0, g1, r1, std::move(res1));
    double lo = 0, hi = 1, flo = g0, fhi = g1;
    double beta = 0.5, gb = g0;
    CaseRates rb = r0;
    IterativeResult resb = std::move(res0);
    for (int it = 0; it < 60; ++it) {
      double mid = (flo != fhi) ? (lo * fhi - hi * flo) / (fhi - flo) : 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
      auto [gm, rm, resm] = eval_b(mid);
      beta = mid;
      gb = gm;
      rb = rm;
      resb = std::move(resm);
      if (std::abs(gm) <= cfg.alpha_tol * scale_of(rm) * 0.1 || (hi - lo) <= 1e-12) break;
      if (gm > 0) {
        hi = mid;
        fhi = gm;
        flo *= 0.5;
      } else {
        lo = mid;
        flo = gm;
        fhi *= 0.5;
      }
    }
    return std::tuple<double, double, CaseRates, IterativeResult>(beta, gb, rb, std::move(resb));
  };

  auto outer_residual = [&](double a1) {
    auto [beta, g_inner, r, res] = inner_solve(a1);
    double g_outer = r.split - r.r_first;
    return std::tuple<double, double, double, CaseRates, IterativeResult>(g_outer, g_inner, beta, r,
                                                                          std::move(res));
  };

  auto [G0, gi0, b0, R0, res0] = outer_residual(0.0);
  auto pack = [&](double a1, double beta, double g_outer, double g_inner, const CaseRates& r,
                  IterativeResult res) {
    out.weights = {a1, beta * (1 - a1)};
    out.inner = std::move(res);
    out.residuals = {g_outer, g_inner};
    double s = scale_of(r);
    out.crossing_found =
        std::abs(g_outer) <= cfg.alpha_tol * s && std::abs(g_inner) <= cfg.alpha_tol * s;
    out.inner.duals.alpha = out.weights;
  };
  if (std::abs(G0) <= cfg.alpha_tol * scale_of(R0)) {
    pack(0.0, b0, G0, gi0, R0, std::move(res0));
    return out;
  }
  auto [G1, gi1, b1, R1, res1] = outer_residual(1.0);
  if (std::abs(G1) <= cfg.alpha_tol * scale_of(R1)) {
    pack(1.0, b1, G1, gi1, R1, std::move(res1));
    return out;
  }
  if ((G0 > 0) == (G1 > 0)) {
    if (std::abs(G0) <= std::abs(G1)) pack(0.0, b0, G0, gi0, R0, std::move(res0));
    else pack(1.0, b1, G1, gi1, R1, std::move(res1));
    out.crossing_found = false;
    return out;
  }
  double lo = 0, hi = 1, flo = G0, fhi = G1;
  double best_a1 = 0.5, best_beta = 0.5, best_go = flo, best_gi = gi0;
  CaseRates best_r = R0;
  IterativeResult best_res = std::move(res0);
  for (int it = 0; it < 60; ++it) {
    double mid = (flo != fhi) ? (lo * fhi - hi * flo) / (fhi - flo) : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    auto [Gm, gim, bm, Rm, resm] = outer_residual(mid);
    if (std::abs(Gm) < std::abs(best_go)) {
      best_a1 = mid;
      best_beta = bm;
      best_go = Gm;
      best_gi = gim;
      best_r = Rm;
      best_res = std::move(resm);
    }
    if (std::abs(Gm) <= cfg.alpha_tol * scale_of(Rm) || (hi - lo) <= 1e-12) break;
    if ((Gm > 0) == (fhi > 0)) {
      hi = mid;
      fhi = Gm;
      flo *= 0.5;
    } else {
      lo = mid;
      flo = Gm;
      fhi *= 0.5;
    }
  }
  pack(best_a1, best_beta, best_go, best_gi, best_r, std::move(best_res));
  return out;
}

namespace {

// Euclidean projection of a column onto {x >= 0, mean(x) <= p_bar}, exact.
void project_column(std::vector<double>& x, double p_bar) {
  const int n = static_cast<int>(x.size());
  double mean_pos = 0;
  for (double v : x) mean_pos += std::max(0.0, v);
  mean_pos /= n;
  if (mean_pos <= p_bar) {
    for (double& v : x) v = std::max(0.0, v);
    return;
  }
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // find tau with mean((x - tau)^+) = p_bar
  double prefix = 0, tau = 0;
  const double target = p_bar * n;
  for (int m = 1; m <= n; ++m) {
    prefix += sorted[m - 1];
    double cand = (prefix - target) / m;
    double next = m < n ? sorted[m] : -std::numeric_limits<double>::infinity();
    if (cand >= next && cand <= sorted[m - 1]) {
      tau = cand;
      break;
    }
  }
  for (double& v : x) v = std::max(0.0, v - tau);
}

}  // namespace

GradientResult projected_gradient_concave(const FadingEnsemble& ens, const Budget& budget,
                                          const CaseObjective& obj, const SolverConfig& cfg,
                                          const PowerPolicy* warm) {
  budget.validate();
  const int n = ens.sample_count();
  const int k = ens.user_count();
  GradientResult out;
  out.policy = PowerPolicy(n, k);
  if (warm && warm->sample_count() == n && warm->user_count() == k) out.policy = *warm;

  std::vector<double> g_dr(n);
  for (int i = 0; i < n; ++i) g_dr[i] = ens.g_relay_dest(i);
  auto relay = waterfill_single(g_dr, 1.0 - budget.theta, budget.relay_power(), cfg);
  for (int i = 0; i < n; ++i) out.policy.at(i, k) = relay.powers[i];

  // clamp warm-start user columns into the feasible set
  std::vector<double> col(n);
  for (int u = 0; u < k; ++u) {
    for (int i = 0; i < n; ++i) col[i] = out.policy(i, u);
    project_column(col, budget.source_power(u + 1));
    for (int i = 0; i < n; ++i) out.policy.at(i, u) = col[i];
  }

  double cur = objective_value(obj, ens, out.policy, budget.theta);
  out.trace.push_back(cur);
  std::vector<double> grad;
  double step = 1.0;
  int stall = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    user_gradient(obj, ens, out.policy, budget.theta, grad);
    bool accepted = false;
    PowerPolicy cand = out.policy;
    for (int bt = 0; bt < 60; ++bt) {
      cand = out.policy;
      for (int u = 0; u < k; ++u) {
        for (int i = 0; i < n; ++i)
          col[i] = out.policy(i, u) + step * grad[static_cast<std::size_t>(u) * n + i];
        project_column(col, budget.source_power(u + 1));
        for (int i = 0; i < n; ++i) cand.at(i, u) = col[i];
      }
      double val = objective_value(obj, ens, cand, budget.theta);
      if (val >= cur) {
        out.policy = cand;
        double delta = val - cur;
        cur = val;
        out.trace.push_back(cur);
        accepted = true;
        step *= 1.3;
        if (delta <= cfg.iter_tol * std::max(1.0, std::abs(cur))) ++stall;
        else stall = 0;
        break;
      }
      step *= 0.5;
      if (step < 1e-18) break;
    }
    out.iterations = it + 1;
    if (!accepted || stall >= 3) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::string trace_to_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,objective\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << "," << trace[i] << "\n";
  return os.str();
}

}  // namespace marc
