#include "marc/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace marc {

WaterfillResult waterfill_single(std::span<const double> gain2, double fraction, double p_bar,
                                 const SolverConfig& cfg) {
  (void)cfg;
  const int n = static_cast<int>(gain2.size());
  if (n == 0) throw std::invalid_argument("waterfill_single: empty gains");
  if (!(fraction > 0)) throw std::invalid_argument("waterfill_single: fraction must be > 0");
  if (!(p_bar >= 0)) throw std::invalid_argument("waterfill_single: p_bar must be >= 0");

  WaterfillResult out;
  out.powers.assign(n, 0.0);
  if (p_bar == 0) return out;

  // breakpoints c_i = fraction / g_i for live samples
  std::vector<double> c;
  c.reserve(n);
  for (double g : gain2)
    if (g > 0) c.push_back(fraction / g);
  if (c.empty()) {
    out.zero_channel = true;
    return out;
  }
  std::sort(c.begin(), c.end());

  // level w solves (1/n) sum_{c_i < w} (w - c_i) = p_bar; exact per segment
  const double target = static_cast<double>(n) * p_bar;
  double prefix = 0;
  double w = 0;
  const int m = static_cast<int>(c.size());
  for (int active = 1; active <= m; ++active) {
    prefix += c[active - 1];
    double cand = (target + prefix) / active;
    double upper = active < m ? c[active] : std::numeric_limits<double>::infinity();
    if (cand >= c[active - 1] && cand <= upper) {
      w = cand;
      break;
    }
  }
  out.water_level = w;
  out.nu = fraction / (w * std::numbers::ln2);
  int idx = 0;
  for (double g : gain2) {
    double p = g > 0 ? std::max(0.0, w - fraction / g) : 0.0;
    out.powers[idx++] = p;
  }
  return out;
}

namespace {

// Average power spent by user u at dual nu_u, holding the other duals fixed;
// the win rule and the water level both depend on nu_u.
double opportunistic_avg_power(const std::vector<std::vector<double>>& gain2,
                               const std::vector<double>& nu, int u, double theta, int n) {
  const int k = static_cast<int>(gain2.size());
  const double level = theta / (nu[u] * std::numbers::ln2);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    double gu = gain2[u][i];
    if (gu <= 0) continue;
    double ratio = gu / nu[u];
    bool wins = true;
    for (int j = 0; j < k; ++j) {
      if (j == u) continue;
      double r = nu[j] > 0 && std::isfinite(nu[j]) ? gain2[j][i] / nu[j] : 0.0;
      if (r > ratio || (r == ratio && j < u)) {
        wins = false;
        break;
      }
    }
    if (!wins) continue;
    total += std::max(0.0, level - theta / gu);
  }
  return total / n;
}

}  // namespace

MacWaterfillResult waterfill_mac_opportunistic(const std::vector<std::vector<double>>& gain2,
                                               double theta,
                                               const std::vector<double>& p_bars,
                                               const SolverConfig& cfg) {
  const int k = static_cast<int>(gain2.size());
  if (k < 1) throw std::invalid_argument("waterfill_mac: need K >= 1");
  if (static_cast<int>(p_bars.size()) != k)
    throw std::invalid_argument("waterfill_mac: budget dimension mismatch");
  if (!(theta > 0)) throw std::invalid_argument("waterfill_mac: theta must be > 0");
  const int n = static_cast<int>(gain2[0].size());
  for (const auto& g : gain2)
    if (static_cast<int>(g.size()) != n)
      throw std::invalid_argument("waterfill_mac: ragged gain matrix");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  MacWaterfillResult out;
  out.nu.assign(k, kInf);
  out.zero_channel.assign(k, false);
  out.powers.assign(k, std::vector<double>(n, 0.0));

  // initialize duals from the single-user solves (ignoring competition)
  std::vector<bool> live(k, false);
  for (int u = 0; u < k; ++u) {
    if (p_bars[u] <= 0) continue;
    auto single = waterfill_single(gain2[u], theta, p_bars[u], cfg);
    if (single.zero_channel) {
      out.zero_channel[u] = true;
      continue;
    }
    out.nu[u] = single.nu;
    live[u] = true;
  }

  int live_count = 0;
  for (int u = 0; u < k; ++u) live_count += live[u];

  if (live_count > 1) {
    const int max_cycles = std::max(50, cfg.max_iters / 10);
    bool converged = false;
    for (int cycle = 0; cycle < max_cycles && !converged; ++cycle) {
      converged = true;
      for (int u = 0; u < k; ++u) {
        if (!live[u]) continue;
        // bracket around the current dual, then bisect
        double lo = out.nu[u], hi = out.nu[u];
        while (opportunistic_avg_power(gain2, out.nu, u, theta, n) < p_bars[u] && lo > 1e-14) {
          lo /= 4;
          out.nu[u] = lo;
        }
        out.nu[u] = hi;
        while (opportunistic_avg_power(gain2, out.nu, u, theta, n) > p_bars[u]) {
          hi *= 4;
          out.nu[u] = hi;
          if (hi > 1e18) break;
        }
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          out.nu[u] = mid;
          double avg = opportunistic_avg_power(gain2, out.nu, u, theta, n);
          if (avg > p_bars[u]) lo = mid; else hi = mid;
          if ((hi - lo) <= 1e-14 * hi) break;
        }
        out.nu[u] = 0.5 * (lo + hi);
        double res = std::abs(opportunistic_avg_power(gain2, out.nu, u, theta, n) - p_bars[u]);
        if (res > cfg.power_tol * std::max(1.0, p_bars[u])) converged = false;
      }
      out.cycles = cycle + 1;
    }
    if (!converged) {
      std::vector<double> residuals(k, 0.0);
      for (int u = 0; u < k; ++u)
        if (live[u])
          residuals[u] = opportunistic_avg_power(gain2, out.nu, u, theta, n) - p_bars[u];
      throw ConvergenceError("waterfill_mac_opportunistic: duals did not converge", residuals);
    }
  }

  // materialize the policy from the final duals
  for (int i = 0; i < n; ++i) {
    int winner = -1;
    double best = 0;
    for (int u = 0; u < k; ++u) {
      if (!live[u] || gain2[u][i] <= 0) continue;
      double r = gain2[u][i] / out.nu[u];
      if (winner < 0 || r > best) {
        best = r;
        winner = u;
      }
    }
    if (winner < 0) continue;
    double level = theta / (out.nu[winner] * std::numbers::ln2);
    out.powers[winner][i] = std::max(0.0, level - theta / gain2[winner][i]);
  }
  for (int u = 0; u < k; ++u)
    if (!live[u]) out.nu[u] = 0.0;  // slack constraint
  return out;
}

double mac_sum_rate(const std::vector<std::vector<double>>& gain2,
                    const std::vector<std::vector<double>>& powers, double theta) {
  const int k = static_cast<int>(gain2.size());
  const int n = static_cast<int>(gain2[0].size());
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    double x = 0;
    for (int u = 0; u < k; ++u) x += gain2[u][i] * powers[u][i];
    sum += std::log1p(x / theta);
  }
  return theta * sum / (n * std::numbers::ln2);
}

}  // namespace marc
