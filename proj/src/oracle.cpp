#include "marc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace marc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::int64_t compositions_at_most(int n, int m) {
  // |{q in Z>=0^n : sum q <= m}| = C(m + n, n), saturating
  long double c = 1;
  for (int i = 1; i <= n; ++i) c = c * (m + i) / i;
  return c > 4e18L ? INT64_MAX : static_cast<std::int64_t>(c + 0.5L);
}

// all q in Z>=0^n with sum(q) <= m, odometer order
void enumerate_columns(int n, int m, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> q(n, 0);
  int total = 0;
  while (true) {
    fn(q);
    int i = 0;
    while (i < n) {
      if (total < m) {
        ++q[i];
        ++total;
        break;
      }
      total -= q[i];
      q[i] = 0;
      ++i;
    }
    if (i == n) break;
  }
}

struct UserColumns {
  double step = 0;
  std::vector<std::vector<int>> quanta;   // column -> per-sample quanta
  std::vector<double> f_relay_single;     // theta-scaled single-user MAC value at the relay
  std::vector<double> f_dest_single;      // same toward the destination (no relay term)
  std::vector<std::vector<double>> x_relay;  // column -> per-sample g*P/theta at the relay
  std::vector<std::vector<double>> x_dest;
};

UserColumns build_user_columns(const FadingEnsemble& ens, int user, double p_bar, double theta,
                               int steps) {
  const int n = ens.sample_count();
  UserColumns out;
  const int m = p_bar > 0 ? steps - 1 : 0;
  out.step = m > 0 ? n * p_bar / m : 0.0;
  enumerate_columns(n, m, [&](const std::vector<int>& q) {
    std::vector<double> xr(n), xd(n);
    double fr = 0, fd = 0;
    for (int i = 0; i < n; ++i) {
      double p = q[i] * out.step;
      xr[i] = ens.g_relay(user, i) * p / theta;
      xd[i] = ens.g_dest(user, i) * p / theta;
      fr += std::log1p(xr[i]);
      fd += std::log1p(xd[i]);
    }
    out.quanta.push_back(q);
    out.f_relay_single.push_back(theta * fr / (n * kLn2));
    out.f_dest_single.push_back(theta * fd / (n * kLn2));
    out.x_relay.push_back(std::move(xr));
    out.x_dest.push_back(std::move(xd));
  });
  return out;
}

struct RelayBest {
  double t_value = 0;  // best avg (1-theta) C(g P / (1-theta))
  std::vector<double> powers;
  double step = 0;
};

RelayBest best_relay_column(const FadingEnsemble& ens, double p_bar, double theta, int steps) {
  const int n = ens.sample_count();
  RelayBest out;
  out.powers.assign(n, 0.0);
  const int m = p_bar > 0 ? steps - 1 : 0;
  out.step = m > 0 ? n * p_bar / m : 0.0;
  const double thetabar = 1 - theta;
  double best = -1;
  enumerate_columns(n, m, [&](const std::vector<int>& q) {
    double t = 0;
    for (int i = 0; i < n; ++i)
      t += std::log1p(ens.g_relay_dest(i) * (q[i] * out.step) / thetabar);
    t = thetabar * t / (n * kLn2);
    if (t > best) {
      best = t;
      for (int i = 0; i < n; ++i) out.powers[i] = q[i] * out.step;
    }
  });
  out.t_value = std::max(0.0, best);
  return out;
}

double joint_mac(const std::vector<double>& xa, const std::vector<double>& xb, double theta,
                 int n) {
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += std::log1p(xa[i] + xb[i]);
  return theta * acc / (n * kLn2);
}

double lipschitz_bound(const FadingEnsemble& ens) {
  const int n = ens.sample_count();
  double total = 0;
  for (int u = 1; u <= ens.user_count(); ++u) {
    double avg = 0;
    for (int i = 0; i < n; ++i) avg += std::max(ens.g_relay(u, i), ens.g_dest(u, i));
    total += avg / n;
  }
  double avg_dr = 0;
  for (int i = 0; i < n; ++i) avg_dr += ens.g_relay_dest(i);
  total += avg_dr / n;
  return total / kLn2;
}

using PairScorer = std::function<double(double r1, double r2, double sp1, double sp2, double b1,
                                        double b2)>;

OracleResult grid_search(const FadingEnsemble& ens, const Budget& budget, const GridSpec& grid,
                         const PairScorer& score, bool prune_by_splits) {
  budget.validate();
  const int n = ens.sample_count();
  const int k = ens.user_count();
  if (k > 2 || n > 8) throw std::invalid_argument("oracle: limited to K <= 2, n <= 8");
  if (grid.steps_per_axis < 2) throw std::invalid_argument("oracle: need >= 2 steps per axis");
  const double theta = budget.theta;

  std::int64_t per_user = compositions_at_most(n, grid.steps_per_axis - 1);
  std::int64_t total = k == 2 ? per_user * per_user : per_user;
  if (total > grid.guard) throw GridGuardExceeded(total, grid.guard);

  RelayBest relay = best_relay_column(ens, budget.relay_power(), theta, grid.steps_per_axis);
  const double t_r = relay.t_value;

  OracleResult out;
  out.lipschitz = lipschitz_bound(ens);
  out.policy = PowerPolicy(n, k);
  for (int i = 0; i < n; ++i) out.policy.at(i, k) = relay.powers[i];

  UserColumns u1 = build_user_columns(ens, 1, budget.source_power(1), theta, grid.steps_per_axis);
  out.step1 = u1.step;
  double best = -1;

  if (k == 1) {
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < u1.quanta.size(); ++c) {
      double r1 = u1.f_relay_single[c];
      double r2 = u1.f_dest_single[c] + t_r;
      double v = score(r1, r2, 0, 0, std::min(r1, r2), 0);
      ++out.evaluated;
      if (v > best) {
        best = v;
        best_c = c;
      }
    }
    for (int i = 0; i < n; ++i) out.policy.at(i, 0) = u1.quanta[best_c][i] * u1.step;
    out.value = best;
    return out;
  }

  UserColumns u2 = build_user_columns(ens, 2, budget.source_power(2), theta, grid.steps_per_axis);
  out.step2 = u2.step;
  std::size_t best_c1 = 0, best_c2 = 0;
  for (std::size_t c1 = 0; c1 < u1.quanta.size(); ++c1) {
    for (std::size_t c2 = 0; c2 < u2.quanta.size(); ++c2) {
      ++out.evaluated;
      // splits from per-column tables
      double sp1 = u1.f_relay_single[c1] + u2.f_dest_single[c2] + t_r;  // S = {1}
      double sp2 = u2.f_relay_single[c2] + u1.f_dest_single[c1] + t_r;  // S = {2}
      if (prune_by_splits && std::min(sp1, sp2) <= best) continue;
      double r1 = joint_mac(u1.x_relay[c1], u2.x_relay[c2], theta, n);
      double r2 = joint_mac(u1.x_dest[c1], u2.x_dest[c2], theta, n) + t_r;
      double b1 = std::min(u1.f_relay_single[c1], u1.f_dest_single[c1] + t_r);
      double b2 = std::min(u2.f_relay_single[c2], u2.f_dest_single[c2] + t_r);
      double v = score(r1, r2, sp1, sp2, b1, b2);
      if (v > best) {
        best = v;
        best_c1 = c1;
        best_c2 = c2;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    out.policy.at(i, 0) = u1.quanta[best_c1][i] * u1.step;
    out.policy.at(i, 1) = u2.quanta[best_c2][i] * u2.step;
  }
  out.value = best;
  return out;
}

}  // namespace

OracleResult grid_best_sum_rate(const FadingEnsemble& ens, const Budget& budget,
                                const GridSpec& grid) {
  auto score = [](double r1, double r2, double sp1, double sp2, double, double) {
    if (sp1 == 0 && sp2 == 0) return std::min(r1, r2);  // K = 1 path
    return std::min(std::min(r1, r2), std::min(sp1, sp2));
  };
  return grid_search(ens, budget, grid, score, /*prune_by_splits=*/true);
}

OracleResult grid_best_weighted(const FadingEnsemble& ens, const Budget& budget,
                                const std::vector<double>& mu, const GridSpec& grid) {
  if (static_cast<int>(mu.size()) != ens.user_count())
    throw std::invalid_argument("grid_best_weighted: weight dimension");
  for (double m : mu)
    if (!(m > 0)) throw std::invalid_argument("grid_best_weighted: weights must be > 0");
  if (ens.user_count() == 1) {
    auto score = [&](double r1, double r2, double, double, double, double) {
      return mu[0] * std::min(r1, r2);
    };
    return grid_search(ens, budget, grid, score, false);
  }
  auto score = [&](double r1, double r2, double sp1, double sp2, double b1, double b2) {
    double bsum = std::min(std::min(r1, r2), std::min(sp1, sp2));
    // max mu.R over {R >= 0, R1 <= b1, R2 <= b2, R1+R2 <= bsum}
    double a1 = std::min(b1, bsum);
    double a2 = std::max(0.0, std::min(b2, bsum - a1));
    double vA = mu[0] * a1 + mu[1] * a2;
    double c2 = std::min(b2, bsum);
    double c1 = std::max(0.0, std::min(b1, bsum - c2));
    double vB = mu[0] * c1 + mu[1] * c2;
    return std::max(vA, vB);
  };
  return grid_search(ens, budget, grid, score, false);
}

}  // namespace marc
