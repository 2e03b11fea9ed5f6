#include "marc/case_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace marc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

enum class Cmp { Less, Equal, Greater };

Cmp band_compare(double lhs, double rhs, double band) {
  double d = lhs - rhs;
  if (std::abs(d) <= band) return Cmp::Equal;
  return d < 0 ? Cmp::Less : Cmp::Greater;
}

struct Rates {
  double r1 = 0, r2 = 0;
  std::vector<std::pair<SubsetMask, double>> splits;  // proper nonempty subsets
  double min_split = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  bool degenerate = false;
};

Rates classify_rates(const RateRegionPair& pair) {
  const int k = pair.user_count();
  const SubsetMask full = full_mask(k);
  Rates r;
  r.r1 = pair.f1(full);
  r.r2 = pair.f2(full);
  for (SubsetMask s = 1; s < full; ++s) {
    double v = pair.f1(s) + pair.f2(full & ~s);
    r.splits.emplace_back(s, v);
    r.min_split = std::min(r.min_split, v);
  }
  r.scale = std::max({1.0, r.r1, r.r2});
  double biggest = std::max(r.r1, r.r2);
  for (auto& [s, v] : r.splits) biggest = std::max(biggest, v);
  r.degenerate = biggest <= 1e-6;
  return r;
}

double split_of(const Rates& r, SubsetMask s) {
  for (auto& [m, v] : r.splits)
    if (m == s) return v;
  throw std::invalid_argument("case label subset out of range");
}

}  // namespace

ConditionCheck check_case_conditions(const RateRegionPair& pair, const CaseLabel& label,
                                     double tol) {
  Rates r = classify_rates(pair);
  const double band = tol * r.scale;
  ConditionCheck out;
  out.label = label;
  out.degenerate = r.degenerate;

  switch (label.kind) {
    case CaseLabel::Kind::Inactive: {
      double sp = split_of(r, label.subset);
      out.residuals = {sp - r.r1, sp - r.r2};
      out.satisfied = band_compare(sp, r.r1, band) == Cmp::Less &&
                      band_compare(sp, r.r2, band) == Cmp::Less;
      break;
    }
    case CaseLabel::Kind::Boundary: {
      double sp = split_of(r, label.subset);
      switch (label.active) {
        case ActiveKind::A3a:
          out.residuals = {sp - r.r1, r.r1 - r.r2};
          out.satisfied = band_compare(sp, r.r1, band) == Cmp::Equal &&
                          band_compare(r.r1, r.r2, band) == Cmp::Less;
          break;
        case ActiveKind::A3b:
          out.residuals = {sp - r.r2, r.r2 - r.r1};
          out.satisfied = band_compare(sp, r.r2, band) == Cmp::Equal &&
                          band_compare(r.r2, r.r1, band) == Cmp::Less;
          break;
        case ActiveKind::A3c:
          out.residuals = {sp - r.r1, r.r1 - r.r2};
          out.satisfied = band_compare(sp, r.r1, band) == Cmp::Equal &&
                          band_compare(r.r1, r.r2, band) == Cmp::Equal;
          break;
      }
      break;
    }
    case CaseLabel::Kind::Active: {
      // active cases additionally need every split above the dominant plane
      double dominant = label.active == ActiveKind::A3a   ? r.r1
                        : label.active == ActiveKind::A3b ? r.r2
                                                          : std::min(r.r1, r.r2);
      out.residuals = {r.r1 - r.r2, r.min_split - dominant};
      bool splits_clear =
          r.splits.empty() || band_compare(r.min_split, dominant, band) == Cmp::Greater;
      switch (label.active) {
        case ActiveKind::A3a:
          out.satisfied = band_compare(r.r1, r.r2, band) == Cmp::Less && splits_clear;
          break;
        case ActiveKind::A3b:
          out.satisfied = band_compare(r.r2, r.r1, band) == Cmp::Less && splits_clear;
          break;
        case ActiveKind::A3c:
          out.satisfied = band_compare(r.r1, r.r2, band) == Cmp::Equal && splits_clear;
          break;
      }
      break;
    }
  }
  return out;
}

std::string ConditionCheck::to_string() const {
  std::ostringstream os;
  os << label.to_string() << (satisfied ? " satisfied" : " rejected");
  if (degenerate) os << " (degenerate)";
  os << " residuals=[";
  for (std::size_t i = 0; i < residuals.size(); ++i) os << (i ? "," : "") << residuals[i];
  os << "]";
  return os.str();
}

std::vector<CaseLabel> case_sweep_order(int k, BoundFamily family) {
  std::vector<CaseLabel> order;
  auto subsets = proper_subsets_ordered(k);
  for (SubsetMask s : subsets) order.push_back(CaseLabel::make_inactive(s, family));
  for (SubsetMask s : subsets)
    for (ActiveKind a : {ActiveKind::A3a, ActiveKind::A3b, ActiveKind::A3c})
      order.push_back(CaseLabel::make_boundary(s, a, family));
  for (ActiveKind a : {ActiveKind::A3a, ActiveKind::A3b, ActiveKind::A3c})
    order.push_back(CaseLabel::make_active(a, family));
  return order;
}

namespace {

struct CaseSolve {
  PowerPolicy policy;
  DualVariables duals;
  int iterations = 0;
  bool skipped = false;             // boundary weights found no crossing
  std::vector<double> residuals;    // boundary residuals when skipped
};

std::vector<std::vector<double>> group_gains(const FadingEnsemble& ens, SubsetMask group,
                                             Side side) {
  std::vector<std::vector<double>> gains;
  const int n = ens.sample_count();
  for (int u = 1; u <= ens.user_count(); ++u) {
    if (!contains(group, u)) continue;
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
      g[i] = side == Side::First ? ens.g_relay(u, i) : ens.g_dest(u, i);
    gains.push_back(std::move(g));
  }
  return gains;
}

void fill_relay_column(const FadingEnsemble& ens, const Budget& budget, const SolverConfig& cfg,
                       double weight, PowerPolicy& policy, DualVariables& duals) {
  const int n = ens.sample_count();
  const int k = ens.user_count();
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = ens.g_relay_dest(i);
  auto relay = waterfill_single(g, 1.0 - budget.theta, budget.relay_power(), cfg);
  for (int i = 0; i < n; ++i) policy.at(i, k) = relay.powers[i];
  duals.nu[k] = weight * relay.nu;
}

// Opportunistic water-filling of a user group toward one receiver.
void fill_group(const FadingEnsemble& ens, const Budget& budget, const SolverConfig& cfg,
                SubsetMask group, Side side, PowerPolicy& policy, DualVariables& duals,
                int& iterations) {
  if (!group) return;
  auto gains = group_gains(ens, group, side);
  std::vector<double> p_bars;
  for (int u = 1; u <= ens.user_count(); ++u)
    if (contains(group, u)) p_bars.push_back(budget.source_power(u));
  auto res = waterfill_mac_opportunistic(gains, budget.theta, p_bars, cfg);
  iterations += res.cycles;
  int idx = 0;
  for (int u = 1; u <= ens.user_count(); ++u) {
    if (!contains(group, u)) continue;
    for (int i = 0; i < ens.sample_count(); ++i) policy.at(i, u - 1) = res.powers[idx][i];
    duals.nu[u - 1] = res.nu[idx];
    ++idx;
  }
}

CaseSolve solve_df_case(const FadingEnsemble& ens, const Budget& budget, const CaseLabel& label,
                        const SolverConfig& cfg) {
  const int n = ens.sample_count();
  const int k = ens.user_count();
  const SubsetMask full = full_mask(k);
  CaseSolve out;
  out.policy = PowerPolicy(n, k);
  out.duals.nu.assign(k + 1, 0.0);

  switch (label.kind) {
    case CaseLabel::Kind::Inactive:
      fill_group(ens, budget, cfg, label.subset, Side::First, out.policy, out.duals,
                 out.iterations);
      fill_group(ens, budget, cfg, full & ~label.subset, Side::Second, out.policy, out.duals,
                 out.iterations);
      fill_relay_column(ens, budget, cfg, 1.0, out.policy, out.duals);
      break;
    case CaseLabel::Kind::Active:
      if (label.active == ActiveKind::A3c) {
        auto bw = solve_boundary_weights(ens, budget, label, cfg);
        out.policy = bw.inner.policy;
        out.duals = bw.inner.duals;
        out.iterations += bw.inner.sweeps;
        out.skipped = !bw.crossing_found;
        out.residuals = bw.residuals;
      } else {
        Side side = label.active == ActiveKind::A3a ? Side::First : Side::Second;
        fill_group(ens, budget, cfg, full, side, out.policy, out.duals, out.iterations);
        fill_relay_column(ens, budget, cfg, label.active == ActiveKind::A3a ? 0.0 : 1.0,
                          out.policy, out.duals);
      }
      break;
    case CaseLabel::Kind::Boundary: {
      auto bw = solve_boundary_weights(ens, budget, label, cfg);
      out.policy = bw.inner.policy;
      out.duals = bw.inner.duals;
      out.iterations += bw.inner.sweeps;
      out.skipped = !bw.crossing_found;
      out.residuals = bw.residuals;
      break;
    }
  }
  return out;
}

CaseSolve solve_cutset_case(const FadingEnsemble& ens, const Budget& budget,
                            const CaseLabel& label, const SolverConfig& cfg,
                            const PowerPolicy* warm) {
  const int n = ens.sample_count();
  const int k = ens.user_count();
  const SubsetMask full = full_mask(k);
  CaseSolve out;
  out.policy = PowerPolicy(n, k);
  out.duals.nu.assign(k + 1, 0.0);

  auto pg_solve = [&](const CaseObjective& obj) {
    GradientResult g = projected_gradient_concave(ens, budget, obj, cfg, warm);
    out.policy = g.policy;
    out.iterations += g.iterations;
    // duals estimated from the marginals on positive powers
    for (int u = 1; u <= k; ++u) {
      double best = 0;
      for (int i = 0; i < n; ++i)
        if (g.policy(i, u - 1) > 0)
          best = std::max(best, user_marginal(obj, ens, g.policy, budget.theta, u, i) / kLn2);
      out.duals.nu[u - 1] = best;
    }
    std::vector<double> gdr(n);
    for (int i = 0; i < n; ++i) gdr[i] = ens.g_relay_dest(i);
    auto relay = waterfill_single(gdr, 1.0 - budget.theta, budget.relay_power(), cfg);
    out.duals.nu[k] = obj.relay_weight() * relay.nu;
  };

  switch (label.kind) {
    case CaseLabel::Kind::Inactive: {
      // K\S users face a plain destination MAC: solved exactly; S users face
      // the SIMO cut: projected gradient. The two groups are separable.
      CaseObjective obj = cutset_case_objective(label, k, {});
      CaseObjective simo_only;
      for (const auto& t : obj.terms)
        if (t.kind == ObjectiveTerm::Kind::SimoLogDet) simo_only.terms.push_back(t);
      GradientResult g = projected_gradient_concave(ens, budget, simo_only, cfg, warm);
      out.iterations += g.iterations;
      for (int u = 1; u <= k; ++u) {
        if (!contains(label.subset, u)) continue;
        for (int i = 0; i < n; ++i) out.policy.at(i, u - 1) = g.policy(i, u - 1);
        double best = 0;
        for (int i = 0; i < n; ++i)
          if (g.policy(i, u - 1) > 0)
            best = std::max(best,
                            user_marginal(simo_only, ens, g.policy, budget.theta, u, i) / kLn2);
        out.duals.nu[u - 1] = best;
      }
      fill_group(ens, budget, cfg, full & ~label.subset, Side::Second, out.policy, out.duals,
                 out.iterations);
      fill_relay_column(ens, budget, cfg, 1.0, out.policy, out.duals);
      break;
    }
    case CaseLabel::Kind::Active:
      if (label.active == ActiveKind::A3a) {
        pg_solve(cutset_case_objective(label, k, {}));
      } else if (label.active == ActiveKind::A3b) {
        fill_group(ens, budget, cfg, full, Side::Second, out.policy, out.duals, out.iterations);
        fill_relay_column(ens, budget, cfg, 1.0, out.policy, out.duals);
      } else {
        auto bw = solve_boundary_weights(ens, budget, label, cfg, warm);
        out.policy = bw.inner.policy;
        out.duals = bw.inner.duals;
        out.iterations += bw.inner.sweeps;
        out.skipped = !bw.crossing_found;
        out.residuals = bw.residuals;
      }
      break;
    case CaseLabel::Kind::Boundary: {
      auto bw = solve_boundary_weights(ens, budget, label, cfg, warm);
      out.policy = bw.inner.policy;
      out.duals = bw.inner.duals;
      out.iterations += bw.inner.sweeps;
      out.skipped = !bw.crossing_found;
      out.residuals = bw.residuals;
      break;
    }
  }
  return out;
}

std::vector<double> case_weights(const CaseLabel& label, const DualVariables& duals) {
  if (label.kind == CaseLabel::Kind::Boundary ||
      (label.kind == CaseLabel::Kind::Active && label.active == ActiveKind::A3c))
    return duals.alpha;
  return {};
}

// KKT residual of the accepted case at its policy and duals; exact marginals
// for ratio objectives, quadratic-form marginals for log-det objectives.
void acceptance_residuals(const FadingEnsemble& ens, const Budget& budget,
                          const CaseLabel& label, const PowerPolicy& policy,
                          const DualVariables& duals, SolverReport& report) {
  const int n = ens.sample_count();
  const int k = ens.user_count();
  std::vector<double> weights = case_weights(label, duals);
  CaseObjective obj = label.family == BoundFamily::Cutset
                          ? cutset_case_objective(label, k, weights)
                          : df_case_objective(label, k, weights);
  double kkt = 0;
  for (int u = 1; u <= k; ++u) {
    double nu_c = duals.nu[u - 1] * kLn2;
    for (int i = 0; i < n; ++i) {
      double f = user_marginal(obj, ens, policy, budget.theta, u, i);
      double e = f - nu_c;
      kkt = std::max(kkt, policy(i, u - 1) > 0 ? std::abs(e) : e);
    }
  }
  const double w_relay = obj.relay_weight();
  const double thetabar = 1.0 - budget.theta;
  double nu_r = duals.nu[k] * kLn2;
  for (int i = 0; i < n; ++i) {
    double g = ens.g_relay_dest(i);
    double f = w_relay * g / (1 + g * policy(i, k) / thetabar);
    double e = f - nu_r;
    kkt = std::max(kkt, policy(i, k) > 0 ? std::abs(e) : e);
  }
  report.kkt_residual = std::max(0.0, kkt);

  double pres = 0;
  for (int c = 0; c <= k; ++c) {
    if (duals.nu[c] <= 0) continue;  // slack constraint
    double cap = budget.p_bar[c];
    pres = std::max(pres, std::abs(policy.column_mean(c) - cap) / std::max(1.0, cap));
  }
  report.power_residual = pres;
}

SolverReport run_case_sweep(std::shared_ptr<const FadingEnsemble> ens, const Budget& budget,
                            const SolverConfig& cfg, BoundFamily family,
                            const PowerPolicy* warm) {
  budget.validate();
  const int k = ens->user_count();
  if (budget.user_count() != k) throw std::invalid_argument("case sweep: budget dimension");
  if (k > (family == BoundFamily::Cutset ? 4 : kMaxUsers))
    throw std::invalid_argument("case sweep: too many users for this bound family");

  std::vector<ConditionCheck> checks;
  int iterations = 0;
  int tried = 0;
  for (const CaseLabel& label : case_sweep_order(k, family)) {
    CaseSolve sol = family == BoundFamily::DF
                        ? solve_df_case(*ens, budget, label, cfg)
                        : solve_cutset_case(*ens, budget, label, cfg, warm);
    iterations += sol.iterations;
    ++tried;
    if (sol.skipped) {
      ConditionCheck chk;
      chk.label = label;
      chk.satisfied = false;
      chk.residuals = sol.residuals;
      checks.push_back(std::move(chk));
      continue;
    }
    RateRegionPair pair(ens, sol.policy, budget.theta, family);
    ConditionCheck chk = check_case_conditions(pair, label);
    checks.push_back(chk);
    if (!chk.satisfied) continue;

    SolverReport report;
    report.policy = sol.policy;
    report.label = label;
    report.duals = sol.duals;
    report.degenerate = chk.degenerate;
    auto verdict = intersect_max_sum(pair.materialize_f1(), pair.materialize_f2());
    report.sum_rate = verdict.max_sum;
    report.iterations = iterations;
    report.cases_tried = tried;
    acceptance_residuals(*ens, budget, label, sol.policy, sol.duals, report);
    report.conditions_checked = std::move(checks);
    return report;
  }
  throw CaseSweepError("case sweep: no case accepted (tolerance misconfiguration?)",
                       std::move(checks));
}

}  // namespace

SolverReport optimal_df_sum_rate(std::shared_ptr<const FadingEnsemble> ens, const Budget& budget,
                                 const SolverConfig& cfg) {
  return run_case_sweep(std::move(ens), budget, cfg, BoundFamily::DF, nullptr);
}

SolverReport optimal_cutset_sum_rate(std::shared_ptr<const FadingEnsemble> ens,
                                     const Budget& budget, const SolverConfig& cfg,
                                     const PowerPolicy* warm) {
  return run_case_sweep(std::move(ens), budget, cfg, BoundFamily::Cutset, warm);
}

std::vector<double> kuser_clustered_corner_rates(const RateRegionPair& pair, SubsetMask s,
                                                 const std::vector<int>& perm_s,
                                                 const std::vector<int>& perm_comp) {
  const int k = pair.user_count();
  const SubsetMask full = full_mask(k);
  if (s == 0 || s >= full) throw std::invalid_argument("corner rates: S must be proper nonempty");
  SubsetMask seen = 0;
  for (int u : perm_s) {
    if (!contains(s, u) || contains(seen, u))
      throw std::invalid_argument("corner rates: perm_s is not a permutation of S");
    seen |= 1u << (u - 1);
  }
  if (seen != s) throw std::invalid_argument("corner rates: perm_s incomplete");
  seen = 0;
  for (int u : perm_comp) {
    if (contains(s, u) || contains(seen, u))
      throw std::invalid_argument("corner rates: perm_comp is not a permutation of K\\S");
    seen |= 1u << (u - 1);
  }
  if (seen != (full & ~s)) throw std::invalid_argument("corner rates: perm_comp incomplete");

  std::vector<double> rates(k, 0.0);
  SubsetMask acc = 0;
  for (int u : perm_s) {
    SubsetMask next = acc | (1u << (u - 1));
    rates[u - 1] = pair.f1(next) - pair.f1(acc);
    acc = next;
  }
  acc = 0;
  for (int u : perm_comp) {
    SubsetMask next = acc | (1u << (u - 1));
    rates[u - 1] = pair.f2(next) - pair.f2(acc);
    acc = next;
  }
  return rates;
}

CertificateResult sum_capacity_certificate(const SolverReport& df, const SolverReport& ob,
                                           double tol) {
  if (df.label.family != BoundFamily::DF || ob.label.family != BoundFamily::Cutset)
    throw std::invalid_argument("sum_capacity_certificate: wrong bound families");
  if (df.policy.sample_count() != ob.policy.sample_count() ||
      df.policy.user_count() != ob.policy.user_count())
    throw std::invalid_argument("sum_capacity_certificate: mismatched instances");
  CertificateResult out;
  bool ob_3b = ob.label.kind == CaseLabel::Kind::Active && ob.label.active == ActiveKind::A3b;
  double diff = std::abs(df.sum_rate - ob.sum_rate);
  out.achieved = ob_3b && diff <= tol;
  out.gap = ob.sum_rate - df.sum_rate;
  return out;
}

std::string SolverReport::to_text() const {
  std::ostringstream os;
  os.precision(12);
  os << "label: " << label.to_string() << "\n";
  os << "family: " << (label.family == BoundFamily::DF ? "df" : "cutset") << "\n";
  os << "sum_rate: " << sum_rate << "\n";
  os << "degenerate: " << (degenerate ? 1 : 0) << "\n";
  os << "iterations: " << iterations << "\n";
  os << "cases_tried: " << cases_tried << "\n";
  os << "kkt_residual: " << kkt_residual << "\n";
  os << "power_residual: " << power_residual << "\n";
  for (std::size_t i = 0; i < duals.nu.size(); ++i) os << "nu." << i + 1 << ": " << duals.nu[i] << "\n";
  for (std::size_t i = 0; i < duals.alpha.size(); ++i)
    os << "alpha." << i + 1 << ": " << duals.alpha[i] << "\n";
  os << "conditions_checked: " << conditions_checked.size() << "\n";
  for (const auto& c : conditions_checked) os << "  " << c.to_string() << "\n";
  return os.str();
}

namespace {

// Weighted-region vertex objective for an active case at K = 2: the low-weight
// user is decoded first, the high-weight user keeps its single-user bound.
// sub 0: high user's relay bound binds; sub 1: destination bound binds;
// sub 2: the two single-user bounds are equal (mixture, experimental).
CaseObjective weighted_active_objective(ActiveKind kind, int lo_user, int hi_user, double mu_lo,
                                        double dmu, int sub, double gamma_mix, double alpha_3c) {
  using K = ObjectiveTerm::Kind;
  const SubsetMask full = 0b11;
  const SubsetMask hi = 1u << (hi_user - 1);
  (void)lo_user;
  CaseObjective obj;
  auto mac = [&](Side side, SubsetMask users, double w) {
    if (w > 0) obj.terms.push_back({K::SourceMac, w, side, users});
  };
  auto relay = [&](double w) {
    if (w > 0) obj.terms.push_back({K::RelayLink, w, Side::Second, 0});
  };
  // sum-rate part
  switch (kind) {
    case ActiveKind::A3a:
      mac(Side::First, full, mu_lo);
      break;
    case ActiveKind::A3b:
      mac(Side::Second, full, mu_lo);
      relay(mu_lo);
      break;
    case ActiveKind::A3c:
      mac(Side::First, full, mu_lo * alpha_3c);
      mac(Side::Second, full, mu_lo * (1 - alpha_3c));
      relay(mu_lo * (1 - alpha_3c));
      break;
  }
  // single-user part for the high-weight user
  auto hi_relay_bound = [&](double w) { mac(Side::First, hi, w); };
  auto hi_dest_bound = [&](double w) {
    mac(Side::Second, hi, w);
    relay(w);
  };
  switch (sub) {
    case 0: hi_relay_bound(dmu); break;
    case 1: hi_dest_bound(dmu); break;
    case 2:
      hi_relay_bound(dmu * gamma_mix);
      hi_dest_bound(dmu * (1 - gamma_mix));
      break;
  }
  return obj;
}

double single_user_bound(const RateRegionPair& pair, int user, Side side) {
  return pair.value(side, 1u << (user - 1));
}

}  // namespace

WeightedReport optimal_df_weighted_region_2user(std::shared_ptr<const FadingEnsemble> ens,
                                                const Budget& budget, double mu1, double mu2,
                                                const SolverConfig& cfg) {
  if (!(mu1 > 0) || !(mu2 > 0))
    throw std::invalid_argument("weighted region: weights must be > 0");
  if (ens->user_count() != 2)
    throw std::invalid_argument("weighted region: K = 2 only");

  auto finish = [&](SolverReport rep, bool experimental) {
    RateRegionPair pair(ens, rep.policy, budget.theta, BoundFamily::DF);
    auto opt = max_weighted_sum_on_intersection(pair.materialize_f1(), pair.materialize_f2(),
                                                {mu1, mu2});
    WeightedReport out;
    out.r1 = opt.rates[0];
    out.r2 = opt.rates[1];
    out.value = opt.value;
    out.report = std::move(rep);
    out.experimental_subcase = experimental;
    return out;
  };

  const double mu_max = std::max(mu1, mu2);
  if (std::abs(mu1 - mu2) <= 1e-12 * mu_max)
    return finish(optimal_df_sum_rate(ens, budget, cfg), false);

  const int lo_user = mu1 < mu2 ? 1 : 2;
  const int hi_user = 3 - lo_user;
  const double mu_lo = std::min(mu1, mu2);
  const double dmu = mu_max - mu_lo;
  const int k = 2;

  std::vector<ConditionCheck> checks;
  int iterations = 0;
  int tried = 0;

  auto accept = [&](const PowerPolicy& policy, const CaseLabel& label, DualVariables duals,
                    bool experimental) {
    SolverReport rep;
    rep.policy = policy;
    rep.label = label;
    rep.duals = std::move(duals);
    RateRegionPair pair(ens, policy, budget.theta, BoundFamily::DF);
    auto verdict = intersect_max_sum(pair.materialize_f1(), pair.materialize_f2());
    rep.sum_rate = verdict.max_sum;
    rep.iterations = iterations;
    rep.cases_tried = tried;
    rep.conditions_checked = checks;
    return finish(std::move(rep), experimental);
  };

  for (const CaseLabel& label : case_sweep_order(k, BoundFamily::DF)) {
    ++tried;
    if (label.kind == CaseLabel::Kind::Inactive) {
      // weights scale the two bottleneck rates but do not change the per-user
      // water-filling programs
      CaseSolve sol = solve_df_case(*ens, budget, label, cfg);
      iterations += sol.iterations;
      RateRegionPair pair(ens, sol.policy, budget.theta, BoundFamily::DF);
      ConditionCheck chk = check_case_conditions(pair, label);
      checks.push_back(chk);
      if (chk.satisfied) return accept(sol.policy, label, sol.duals, false);
      continue;
    }
    if (label.kind == CaseLabel::Kind::Boundary) {
      // mixture of the mu-weighted inactive objective and the mu-weighted
      // active vertex objective, with the boundary equality driven to zero
      for (int sub : {0, 1, 2}) {
        double best_res = std::numeric_limits<double>::infinity();
        PowerPolicy best_policy;
        DualVariables best_duals;
        bool found = false;
        double blo = 0.0, bhi = 1.0, flo = 0, fhi = 0;
        auto residual_at = [&](double beta, PowerPolicy& policy, DualVariables& duals) {
          CaseObjective act =
              weighted_active_objective(label.active, lo_user, hi_user, mu_lo, dmu, sub,
                                        sub == 2 ? 0.5 : 0.0, 0.5);
          CaseObjective inact;
          using KK = ObjectiveTerm::Kind;
          SubsetMask s = label.subset;
          SubsetMask comp = full_mask(2) & ~s;
          double w_s = contains(s, 1) ? mu1 : mu2;
          if (subset_size(s) == 2) w_s = mu_lo;  // both at the relay
          double w_c = contains(comp, 1) ? mu1 : mu2;
          if (subset_size(comp) == 2) w_c = mu_lo;
          inact.terms.push_back({KK::SourceMac, w_s * (1 - beta), Side::First, s});
          if (comp) {
            inact.terms.push_back({KK::SourceMac, w_c * (1 - beta), Side::Second, comp});
            inact.terms.push_back({KK::RelayLink, w_c * (1 - beta), Side::Second, 0});
          }
          CaseObjective mix = inact;
          for (auto t : act.terms) {
            t.weight *= beta;
            mix.terms.push_back(t);
          }
          auto res = solve_iterative(*ens, budget, mix, cfg);
          iterations += res.sweeps;
          RateRegionPair pr(ens, res.policy, budget.theta, BoundFamily::DF);
          Rates rr = classify_rates(pr);
          double nside = label.active == ActiveKind::A3a   ? rr.r1
                         : label.active == ActiveKind::A3b ? rr.r2
                                                           : std::min(rr.r1, rr.r2);
          double g = split_of(rr, label.subset) - nside;
          policy = res.policy;
          duals = res.duals;
          return g;
        };
        PowerPolicy p0, p1;
        DualVariables d0, d1;
        flo = residual_at(0.0, p0, d0);
        if (std::abs(flo) < best_res) { best_res = std::abs(flo); best_policy = p0; best_duals = d0; found = true; }
        fhi = residual_at(1.0, p1, d1);
        if (std::abs(fhi) < best_res) { best_res = std::abs(fhi); best_policy = p1; best_duals = d1; found = true; }
        if ((flo > 0) != (fhi > 0)) {
          for (int it = 0; it < 40 && (bhi - blo) > 1e-10; ++it) {
            double mid = 0.5 * (blo + bhi);
            PowerPolicy pm;
            DualVariables dm;
            double fm = residual_at(mid, pm, dm);
            if (std::abs(fm) < best_res) { best_res = std::abs(fm); best_policy = pm; best_duals = dm; }
            if (std::abs(fm) <= cfg.alpha_tol) break;
            if ((fm > 0) == (fhi > 0)) { bhi = mid; fhi = fm; }
            else { blo = mid; flo = fm; }
          }
        }
        if (!found || best_res > cfg.alpha_tol * 10) continue;
        RateRegionPair pair(ens, best_policy, budget.theta, BoundFamily::DF);
        ConditionCheck chk = check_case_conditions(pair, label);
        checks.push_back(chk);
        if (chk.satisfied) return accept(best_policy, label, best_duals, sub == 2);
        break;  // boundary case classified once; move to the next label
      }
      continue;
    }
    // Active cases: three sub-cases on the high-weight user's single bounds.
    for (int sub : {0, 1, 2}) {
      PowerPolicy policy;
      DualVariables duals;
      bool experimental = sub == 2;
      bool solved = false;
      if (label.active != ActiveKind::A3c && sub != 2) {
        CaseObjective obj = weighted_active_objective(label.active, lo_user, hi_user, mu_lo,
                                                      dmu, sub, 0.0, 0.0);
        auto res = solve_iterative(*ens, budget, obj, cfg);
        iterations += res.sweeps;
        policy = res.policy;
        duals = res.duals;
        solved = true;
      } else {
        // one (or two) equality conditions: bisect the mixing weight(s)
        auto solve_mixture = [&](double outer) {
          // outer: alpha for 3c (sum-rate equality); gamma for sub 2
          double alpha = label.active == ActiveKind::A3c ? outer : 0.0;
          double gamma = sub == 2 ? outer : 0.0;
          CaseObjective obj;
          if (label.active == ActiveKind::A3c && sub == 2) {
            obj = weighted_active_objective(label.active, lo_user, hi_user, mu_lo, dmu, sub,
                                            0.5, alpha);
          } else if (label.active == ActiveKind::A3c) {
            obj = weighted_active_objective(label.active, lo_user, hi_user, mu_lo, dmu, sub,
                                            0.0, alpha);
          } else {
            obj = weighted_active_objective(label.active, lo_user, hi_user, mu_lo, dmu, sub,
                                            gamma, 0.0);
          }
          auto res = solve_iterative(*ens, budget, obj, cfg);
          iterations += res.sweeps;
          return res;
        };
        auto residual_of = [&](const PowerPolicy& p) {
          RateRegionPair pr(ens, p, budget.theta, BoundFamily::DF);
          if (label.active == ActiveKind::A3c) return pr.f1(0b11) - pr.f2(0b11);
          return single_user_bound(pr, hi_user, Side::First) -
                 single_user_bound(pr, hi_user, Side::Second);
        };
        double lo = 0, hi = 1;
        auto rlo = solve_mixture(lo);
        double glo = residual_of(rlo.policy);
        auto rhi = solve_mixture(hi);
        double ghi = residual_of(rhi.policy);
        if ((glo > 0) == (ghi > 0)) {
          if (std::abs(glo) <= cfg.alpha_tol || std::abs(ghi) <= cfg.alpha_tol) {
            bool keep_lo = std::abs(glo) <= std::abs(ghi);
            policy = keep_lo ? rlo.policy : rhi.policy;
            duals = keep_lo ? rlo.duals : rhi.duals;
            solved = true;
          }
        } else {
          IterativeResult best = std::abs(glo) < std::abs(ghi) ? rlo : rhi;
          double bestg = std::min(std::abs(glo), std::abs(ghi));
          for (int it = 0; it < 40 && (hi - lo) > 1e-10; ++it) {
            double mid = 0.5 * (lo + hi);
            auto rm = solve_mixture(mid);
            double gm = residual_of(rm.policy);
            if (std::abs(gm) < bestg) { bestg = std::abs(gm); best = rm; }
            if (std::abs(gm) <= cfg.alpha_tol) break;
            if ((gm > 0) == (ghi > 0)) { hi = mid; ghi = gm; }
            else { lo = mid; glo = gm; }
          }
          policy = best.policy;
          duals = best.duals;
          solved = true;
        }
      }
      if (!solved) continue;
      RateRegionPair pair(ens, policy, budget.theta, BoundFamily::DF);
      // sub-case consistency on the high user's bounds
      double br = single_user_bound(pair, hi_user, Side::First);
      double bd = single_user_bound(pair, hi_user, Side::Second);
      double band = CaseTolerance{}.eq_tol * std::max({1.0, br, bd});
      Cmp c = band_compare(br, bd, band);
      bool sub_ok = (sub == 0 && c == Cmp::Less) || (sub == 1 && c == Cmp::Greater) ||
                    (sub == 2 && c == Cmp::Equal);
      ConditionCheck chk = check_case_conditions(pair, label);
      chk.residuals.push_back(br - bd);
      checks.push_back(chk);
      if (chk.satisfied && sub_ok) return accept(policy, label, duals, experimental);
    }
  }
  throw CaseSweepError("weighted region: no case accepted", std::move(checks));
}

}  // namespace marc
