#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace marc {

struct Vec2 {
  double x = 0, y = 0;
};

double distance(const Vec2& a, const Vec2& b);

// Node layout on the unit-distance plane with path-loss exponent gamma.
struct Geometry {
  std::vector<Vec2> sources;
  Vec2 relay;
  Vec2 destination;
  double gamma = 3.0;

  int user_count() const { return static_cast<int>(sources.size()); }
  // Throws std::invalid_argument on colocated transmitter/receiver pairs or gamma <= 0.
  void validate() const;
};

// Average-power limits (sources then relay, noise-normalized watts) and the
// bandwidth fraction theta given to the source band.
struct Budget {
  std::vector<double> p_bar;  // size K+1, last entry is the relay
  double theta = 0.5;

  int user_count() const { return static_cast<int>(p_bar.size()) - 1; }
  double source_power(int user) const { return p_bar[user - 1]; }
  double relay_power() const { return p_bar.back(); }
  void validate() const;
};

// N samples of complex channel gains for every link, the sample-average model
// of the ergodic expectation (each sample has probability weight 1/n).
// Links are sub-seeded by (seed, receiver, transmitter) so a link's stream is
// invariant to geometry edits elsewhere.
class FadingEnsemble {
 public:
  FadingEnsemble(int n, int k);

  int sample_count() const { return n_; }
  int user_count() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  const Geometry& geometry() const { return geometry_; }

  std::complex<double> h_relay(int user, int i) const { return to_relay_[(user - 1) * n_ + i]; }
  std::complex<double> h_dest(int user, int i) const { return to_dest_[(user - 1) * n_ + i]; }
  std::complex<double> h_relay_dest(int i) const { return relay_dest_[i]; }

  // squared magnitudes, precomputed
  double g_relay(int user, int i) const { return g_relay_[(user - 1) * n_ + i]; }
  double g_dest(int user, int i) const { return g_dest_[(user - 1) * n_ + i]; }
  double g_relay_dest(int i) const { return g_relay_dest_[i]; }

  void set_gain(char receiver, int transmitter, int i, std::complex<double> h);
  void set_provenance(const Geometry& g, std::uint64_t seed);

  // CSV round-trip: header "sample,receiver,transmitter,re,im".
  void export_csv(std::ostream& os) const;
  static FadingEnsemble import_csv(std::istream& is);

 private:
  void refresh_magnitudes();

  int n_, k_;
  std::uint64_t seed_ = 0;
  Geometry geometry_;
  std::vector<std::complex<double>> to_relay_;    // [user-1][i]
  std::vector<std::complex<double>> to_dest_;     // [user-1][i]
  std::vector<std::complex<double>> relay_dest_;  // [i]
  std::vector<double> g_relay_, g_dest_, g_relay_dest_;
};

// Rayleigh-with-path-loss sampler: H = A / sqrt(d^gamma) with A standard
// circularly symmetric complex Gaussian. Deterministic in (geom, n, seed).
FadingEnsemble sample_ensemble(const Geometry& geom, int n, std::uint64_t seed);

// Ergodic sum-capacity of the fading MAC to the destination with theta = 1 and
// no relay (the no-relay baseline; constant in relay position).
double mac_baseline_sum_capacity(const FadingEnsemble& ens, const Budget& budget);

}  // namespace marc
