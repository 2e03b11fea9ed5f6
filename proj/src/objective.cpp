#include "marc/objective.hpp"

#include <cmath>
#include <numbers>

namespace marc {

double CaseObjective::relay_weight() const {
  double w = 0;
  for (const auto& t : terms)
    if (t.kind == ObjectiveTerm::Kind::RelayLink) w += t.weight;
  return w;
}

bool CaseObjective::has_logdet() const {
  for (const auto& t : terms)
    if (t.kind == ObjectiveTerm::Kind::SimoLogDet && t.weight > 0) return true;
  return false;
}

bool CaseObjective::involves_user(int user) const {
  for (const auto& t : terms)
    if (t.kind != ObjectiveTerm::Kind::RelayLink && t.weight > 0 && contains(t.users, user))
      return true;
  return false;
}

namespace {

// det(I + sum_{k in users} G_k P_k / theta) - 1 for the 2x2 SIMO matrix,
// plus the quadratic-form pieces needed by the gradient.
struct SimoState {
  double a = 0, d = 0;
  std::complex<double> b{0, 0};
  double det() const { return (1 + a) * (1 + d) - std::norm(b); }
};

SimoState simo_state(const FadingEnsemble& ens, const PowerPolicy& policy, double theta,
                     SubsetMask users, int i) {
  SimoState st;
  for (int u = 1; u <= ens.user_count(); ++u) {
    if (!contains(users, u)) continue;
    double p = policy(i, u - 1) / theta;
    st.a += ens.g_relay(u, i) * p;
    st.d += ens.g_dest(u, i) * p;
    st.b += ens.h_relay(u, i) * std::conj(ens.h_dest(u, i)) * p;
  }
  return st;
}

}  // namespace

double objective_value(const CaseObjective& obj, const FadingEnsemble& ens,
                       const PowerPolicy& policy, double theta) {
  const int n = ens.sample_count();
  const int k = ens.user_count();
  const double thetabar = 1.0 - theta;
  double total = 0;
  for (const auto& t : obj.terms) {
    if (t.weight == 0) continue;
    double acc = 0;
    switch (t.kind) {
      case ObjectiveTerm::Kind::SourceMac:
        for (int i = 0; i < n; ++i) {
          double x = 0;
          for (int u = 1; u <= k; ++u)
            if (contains(t.users, u))
              x += (t.receiver == Side::First ? ens.g_relay(u, i) : ens.g_dest(u, i)) *
                   policy(i, u - 1);
          acc += theta * std::log1p(x / theta);
        }
        break;
      case ObjectiveTerm::Kind::RelayLink:
        for (int i = 0; i < n; ++i)
          acc += thetabar * std::log1p(ens.g_relay_dest(i) * policy(i, k) / thetabar);
        break;
      case ObjectiveTerm::Kind::SimoLogDet:
        for (int i = 0; i < n; ++i) {
          SimoState st = simo_state(ens, policy, theta, t.users, i);
          acc += theta * std::log1p(st.a + st.d + st.a * st.d - std::norm(st.b));
        }
        break;
    }
    total += t.weight * acc;
  }
  return total / (n * std::numbers::ln2);
}

double user_marginal(const CaseObjective& obj, const FadingEnsemble& ens,
                     const PowerPolicy& policy, double theta, int user, int i) {
  double f = 0;
  const int k = ens.user_count();
  for (const auto& t : obj.terms) {
    if (t.weight == 0 || !contains(t.users, user)) continue;
    if (t.kind == ObjectiveTerm::Kind::SourceMac) {
      double x = 0;
      for (int u = 1; u <= k; ++u)
        if (contains(t.users, u))
          x += (t.receiver == Side::First ? ens.g_relay(u, i) : ens.g_dest(u, i)) *
               policy(i, u - 1);
      double g = t.receiver == Side::First ? ens.g_relay(user, i) : ens.g_dest(user, i);
      f += t.weight * g / (1 + x / theta);
    } else if (t.kind == ObjectiveTerm::Kind::SimoLogDet) {
      SimoState st = simo_state(ens, policy, theta, t.users, i);
      double det = st.det();
      double gr = ens.g_relay(user, i), gd = ens.g_dest(user, i);
      std::complex<double> cross = ens.h_relay(user, i) * std::conj(ens.h_dest(user, i));
      double quad =
          ((1 + st.d) * gr + (1 + st.a) * gd - 2 * std::real(std::conj(st.b) * cross)) / det;
      f += t.weight * quad;
    }
  }
  return f;
}

void user_gradient(const CaseObjective& obj, const FadingEnsemble& ens, const PowerPolicy& policy,
                   double theta, std::vector<double>& grad) {
  const int n = ens.sample_count();
  const int k = ens.user_count();
  grad.assign(static_cast<std::size_t>(n) * k, 0.0);
  const double scale = 1.0 / (n * std::numbers::ln2);
  for (const auto& t : obj.terms) {
    if (t.weight == 0 || t.kind == ObjectiveTerm::Kind::RelayLink) continue;
    if (t.kind == ObjectiveTerm::Kind::SourceMac) {
      for (int i = 0; i < n; ++i) {
        double x = 0;
        for (int u = 1; u <= k; ++u)
          if (contains(t.users, u))
            x += (t.receiver == Side::First ? ens.g_relay(u, i) : ens.g_dest(u, i)) *
                 policy(i, u - 1);
        double denom = 1 + x / theta;
        for (int u = 1; u <= k; ++u) {
          if (!contains(t.users, u)) continue;
          double g = t.receiver == Side::First ? ens.g_relay(u, i) : ens.g_dest(u, i);
          grad[static_cast<std::size_t>(u - 1) * n + i] += t.weight * scale * g / denom;
        }
      }
    } else {
      for (int i = 0; i < n; ++i) {
        SimoState st = simo_state(ens, policy, theta, t.users, i);
        double det = st.det();
        for (int u = 1; u <= k; ++u) {
          if (!contains(t.users, u)) continue;
          double gr = ens.g_relay(u, i), gd = ens.g_dest(u, i);
          std::complex<double> cross = ens.h_relay(u, i) * std::conj(ens.h_dest(u, i));
          double quad =
              ((1 + st.d) * gr + (1 + st.a) * gd - 2 * std::real(std::conj(st.b) * cross)) / det;
          grad[static_cast<std::size_t>(u - 1) * n + i] += t.weight * scale * quad;
        }
      }
    }
  }
}

}  // namespace marc
