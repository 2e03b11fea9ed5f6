#include "marc/rate_bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace marc {

double PowerPolicy::column_mean(int col) const {
  const double* c = column(col);
  double s = 0;
  for (int i = 0; i < n_; ++i) s += c[i];
  return s / n_;
}

std::vector<double> PowerPolicy::column_means() const {
  std::vector<double> out(k_ + 1);
  for (int c = 0; c <= k_; ++c) out[c] = column_mean(c);
  return out;
}

bool PowerPolicy::feasible(const Budget& budget, double tol) const {
  if (budget.user_count() != k_) return false;
  for (const double v : data_)
    if (v < 0) return false;
  for (int c = 0; c <= k_; ++c) {
    double cap = budget.p_bar[c];
    if (column_mean(c) > cap + tol * std::max(1.0, cap)) return false;
  }
  return true;
}

void PowerPolicy::check_nonnegative() const {
  for (const double v : data_)
    if (v < 0) throw std::invalid_argument("PowerPolicy: negative power entry");
}

RateRegionPair::RateRegionPair(std::shared_ptr<const FadingEnsemble> ens, PowerPolicy policy,
                               double theta, BoundFamily family)
    : ens_(std::move(ens)), policy_(std::move(policy)), theta_(theta), family_(family) {
  const int k = ens_->user_count();
  if (policy_.user_count() != k || policy_.sample_count() != ens_->sample_count())
    throw std::invalid_argument("RateRegionPair: policy dimensions do not match ensemble");
  policy_.check_nonnegative();
  cache1_.assign(std::size_t{1} << k, std::nullopt);
  cache2_.assign(std::size_t{1} << k, std::nullopt);
}

double RateRegionPair::f1(SubsetMask s) const {
  if (s == 0) return 0;
  if (!cache1_[s]) cache1_[s] = compute(Side::First, s);
  return *cache1_[s];
}

double RateRegionPair::f2(SubsetMask s) const {
  if (s == 0) return 0;
  if (!cache2_[s]) cache2_[s] = compute(Side::Second, s);
  return *cache2_[s];
}

double RateRegionPair::compute(Side side, SubsetMask s) const {
  const int n = ens_->sample_count();
  const int k = ens_->user_count();
  const double theta = theta_;
  const double thetabar = 1.0 - theta;
  double acc = 0;

  if (side == Side::First && family_ == BoundFamily::DF) {
    for (int i = 0; i < n; ++i) {
      double x = 0;
      for (int u = 1; u <= k; ++u)
        if (contains(s, u)) x += ens_->g_relay(u, i) * policy_(i, u - 1);
      acc += std::log1p(x / theta);
    }
    return theta * acc / (n * std::numbers::ln2);
  }

  if (side == Side::First) {  // cutset SIMO bound, 2x2 determinant in closed form
    for (int i = 0; i < n; ++i) {
      double a = 0, d = 0;
      std::complex<double> b{0, 0};
      for (int u = 1; u <= k; ++u) {
        if (!contains(s, u)) continue;
        double p = policy_(i, u - 1) / theta;
        a += ens_->g_relay(u, i) * p;
        d += ens_->g_dest(u, i) * p;
        b += ens_->h_relay(u, i) * std::conj(ens_->h_dest(u, i)) * p;
      }
      // det(I + sum p G_k) = (1+a)(1+d) - |b|^2; log via log1p of (det - 1)
      double det_minus_1 = a + d + a * d - std::norm(b);
      acc += std::log1p(det_minus_1);
    }
    return theta * acc / (n * std::numbers::ln2);
  }

  // destination bound, same for both families
  for (int i = 0; i < n; ++i) {
    double x = 0;
    for (int u = 1; u <= k; ++u)
      if (contains(s, u)) x += ens_->g_dest(u, i) * policy_(i, u - 1);
    acc += theta * std::log1p(x / theta);
    acc += thetabar * std::log1p(ens_->g_relay_dest(i) * policy_(i, k) / thetabar);
  }
  return acc / (n * std::numbers::ln2);
}

SetFunction RateRegionPair::materialize_f1() const {
  SetFunction f(user_count());
  for (SubsetMask s = 1; s <= full_mask(user_count()); ++s) f.set(s, std::max(0.0, f1(s)));
  return f;
}

SetFunction RateRegionPair::materialize_f2() const {
  SetFunction f(user_count());
  for (SubsetMask s = 1; s <= full_mask(user_count()); ++s) f.set(s, std::max(0.0, f2(s)));
  return f;
}

RateRegionPair df_bounds(std::shared_ptr<const FadingEnsemble> ens, const PowerPolicy& policy,
                         const Budget& budget) {
  budget.validate();
  return RateRegionPair(std::move(ens), policy, budget.theta, BoundFamily::DF);
}

RateRegionPair cutset_bounds(std::shared_ptr<const FadingEnsemble> ens, const PowerPolicy& policy,
                             const Budget& budget) {
  budget.validate();
  return RateRegionPair(std::move(ens), policy, budget.theta, BoundFamily::Cutset);
}

double successive_min_rate(const RateRegionPair& pair, SubsetMask s, Side receiver) {
  if (s == 0) throw std::invalid_argument("successive_min_rate: empty subset");
  const SubsetMask full = full_mask(pair.user_count());
  if (s & ~full) throw std::invalid_argument("successive_min_rate: subset out of range");
  return pair.value(receiver, full) - pair.value(receiver, full & ~s);
}

}  // namespace marc
