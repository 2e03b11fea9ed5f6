#pragma once

#include <vector>

#include "marc/fading.hpp"

namespace marc {

// Per-sample nonnegative transmit powers, one column per transmitter
// (K sources then the relay). The optimization variable.
class PowerPolicy {
 public:
  PowerPolicy() = default;
  PowerPolicy(int n, int k) : n_(n), k_(k) { data_.assign(static_cast<std::size_t>(n) * (k + 1), 0.0); }

  int sample_count() const { return n_; }
  int user_count() const { return k_; }

  // col: 0..K-1 sources, K relay (column-major storage)
  double operator()(int i, int col) const { return data_[static_cast<std::size_t>(col) * n_ + i]; }
  double& at(int i, int col) { return data_[static_cast<std::size_t>(col) * n_ + i]; }

  const double* column(int col) const { return data_.data() + static_cast<std::size_t>(col) * n_; }
  double* column(int col) { return data_.data() + static_cast<std::size_t>(col) * n_; }

  double column_mean(int col) const;
  std::vector<double> column_means() const;

  // all entries >= 0 and column means <= P_bar within tol (relative)
  bool feasible(const Budget& budget, double tol) const;
  void check_nonnegative() const;

 private:
  int n_ = 0, k_ = 0;
  std::vector<double> data_;
};

}  // namespace marc
