#include "marc/fading.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "marc/subsets.hpp"
#include "marc/waterfill.hpp"

namespace marc {

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void Geometry::validate() const {
  if (sources.empty()) throw std::invalid_argument("geometry: no sources");
  if (static_cast<int>(sources.size()) > kMaxUsers)
    throw std::invalid_argument("geometry: too many sources");
  if (!(gamma > 0)) throw std::invalid_argument("geometry: gamma must be > 0");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (distance(sources[i], relay) <= 0)
      throw std::invalid_argument("geometry: source colocated with relay");
    if (distance(sources[i], destination) <= 0)
      throw std::invalid_argument("geometry: source colocated with destination");
  }
  if (distance(relay, destination) <= 0)
    throw std::invalid_argument("geometry: relay colocated with destination");
}

void Budget::validate() const {
  if (p_bar.size() < 2) throw std::invalid_argument("budget: need at least one source and the relay");
  for (double p : p_bar)
    if (!(p >= 0)) throw std::invalid_argument("budget: powers must be >= 0");
  if (!(theta > 0 && theta < 1)) throw std::invalid_argument("budget: theta must be in (0,1)");
}

FadingEnsemble::FadingEnsemble(int n, int k) : n_(n), k_(k) {
  if (n < 1) throw std::invalid_argument("ensemble: n >= 1 required");
  if (k < 1 || k > 6) throw std::invalid_argument("ensemble: K out of range");
  to_relay_.assign(static_cast<std::size_t>(n) * k, {0, 0});
  to_dest_.assign(static_cast<std::size_t>(n) * k, {0, 0});
  relay_dest_.assign(n, {0, 0});
  g_relay_.assign(static_cast<std::size_t>(n) * k, 0.0);
  g_dest_.assign(static_cast<std::size_t>(n) * k, 0.0);
  g_relay_dest_.assign(n, 0.0);
}

void FadingEnsemble::set_gain(char receiver, int transmitter, int i, std::complex<double> h) {
  if (i < 0 || i >= n_) throw std::out_of_range("ensemble: sample index");
  if (receiver == 'r') {
    if (transmitter < 1 || transmitter > k_) throw std::out_of_range("ensemble: transmitter");
    to_relay_[(transmitter - 1) * n_ + i] = h;
    g_relay_[(transmitter - 1) * n_ + i] = std::norm(h);
  } else if (receiver == 'd') {
    if (transmitter == 0) {  // relay encoded as transmitter id 0 internally
      relay_dest_[i] = h;
      g_relay_dest_[i] = std::norm(h);
    } else {
      if (transmitter < 1 || transmitter > k_) throw std::out_of_range("ensemble: transmitter");
      to_dest_[(transmitter - 1) * n_ + i] = h;
      g_dest_[(transmitter - 1) * n_ + i] = std::norm(h);
    }
  } else {
    throw std::invalid_argument("ensemble: receiver must be 'r' or 'd'");
  }
}

void FadingEnsemble::set_provenance(const Geometry& g, std::uint64_t seed) {
  geometry_ = g;
  seed_ = seed;
}

void FadingEnsemble::refresh_magnitudes() {
  for (std::size_t i = 0; i < to_relay_.size(); ++i) g_relay_[i] = std::norm(to_relay_[i]);
  for (std::size_t i = 0; i < to_dest_.size(); ++i) g_dest_[i] = std::norm(to_dest_[i]);
  for (std::size_t i = 0; i < relay_dest_.size(); ++i) g_relay_dest_[i] = std::norm(relay_dest_[i]);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t link_seed(std::uint64_t seed, int receiver_id, int transmitter_id) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0x517cc1b727220a95ULL * static_cast<std::uint64_t>(receiver_id + 1);
  (void)splitmix64(s);
  s ^= 0x2545f4914f6cdd1dULL * static_cast<std::uint64_t>(transmitter_id + 1);
  return splitmix64(s);
}

// Counter-based stream of standard circularly-symmetric complex Gaussians
// (E|A|^2 = 1): fixed Box-Muller over splitmix64 output, bit-reproducible
// across platforms.
class ComplexGaussianStream {
 public:
  explicit ComplexGaussianStream(std::uint64_t seed) : state_(seed) {}

  std::complex<double> next() {
    double u1 = uniform_open();
    double u2 = uniform_open();
    double r = std::sqrt(-std::log(u1));  // each component N(0, 1/2)
    double phi = 2 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  double uniform_open() {
    // in (0,1]: top 53 bits, shifted away from 0
    std::uint64_t bits = splitmix64(state_);
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }
  std::uint64_t state_;
};

}  // namespace

FadingEnsemble sample_ensemble(const Geometry& geom, int n, std::uint64_t seed) {
  geom.validate();
  if (n < 1) throw std::invalid_argument("sample_ensemble: n >= 1 required");
  const int k = geom.user_count();
  FadingEnsemble ens(n, k);
  ens.set_provenance(geom, seed);

  // receiver ids: r = 0, d = 1; transmitter ids: users 1..K, relay = 0
  for (int u = 1; u <= k; ++u) {
    double scale = 1.0 / std::sqrt(std::pow(distance(geom.sources[u - 1], geom.relay), geom.gamma));
    ComplexGaussianStream gs(link_seed(seed, 0, u));
    for (int i = 0; i < n; ++i) ens.set_gain('r', u, i, scale * gs.next());
  }
  for (int u = 1; u <= k; ++u) {
    double scale =
        1.0 / std::sqrt(std::pow(distance(geom.sources[u - 1], geom.destination), geom.gamma));
    ComplexGaussianStream gs(link_seed(seed, 1, u));
    for (int i = 0; i < n; ++i) ens.set_gain('d', u, i, scale * gs.next());
  }
  {
    double scale = 1.0 / std::sqrt(std::pow(distance(geom.relay, geom.destination), geom.gamma));
    ComplexGaussianStream gs(link_seed(seed, 1, 0));
    for (int i = 0; i < n; ++i) ens.set_gain('d', 0, i, scale * gs.next());
  }
  return ens;
}

void FadingEnsemble::export_csv(std::ostream& os) const {
  os << "sample,receiver,transmitter,re,im\n";
  os.precision(17);
  for (int i = 0; i < n_; ++i) {
    for (int u = 1; u <= k_; ++u) {
      auto h = h_relay(u, i);
      os << i << ",r," << u << "," << h.real() << "," << h.imag() << "\n";
    }
    for (int u = 1; u <= k_; ++u) {
      auto h = h_dest(u, i);
      os << i << ",d," << u << "," << h.real() << "," << h.imag() << "\n";
    }
    auto h = h_relay_dest(i);
    os << i << ",d,r," << h.real() << "," << h.imag() << "\n";
  }
}

FadingEnsemble FadingEnsemble::import_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("ensemble csv: empty");
  struct Row {
    int sample;
    char receiver;
    int transmitter;  // 0 = relay
    std::complex<double> h;
  };
  std::vector<Row> rows;
  int max_sample = -1, max_user = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    Row r;
    std::getline(ls, field, ',');
    r.sample = std::stoi(field);
    std::getline(ls, field, ',');
    r.receiver = field.at(0);
    std::getline(ls, field, ',');
    r.transmitter = field == "r" ? 0 : std::stoi(field);
    std::getline(ls, field, ',');
    double re = std::stod(field);
    std::getline(ls, field, ',');
    double im = std::stod(field);
    r.h = {re, im};
    rows.push_back(r);
    max_sample = std::max(max_sample, r.sample);
    max_user = std::max(max_user, r.transmitter);
  }
  FadingEnsemble ens(max_sample + 1, max_user);
  for (const Row& r : rows) ens.set_gain(r.receiver, r.transmitter, r.sample, r.h);
  return ens;
}

double mac_baseline_sum_capacity(const FadingEnsemble& ens, const Budget& budget) {
  const int k = ens.user_count();
  if (budget.user_count() != k) throw std::invalid_argument("mac_baseline: budget dimension");
  std::vector<std::vector<double>> gains(k);
  for (int u = 1; u <= k; ++u) {
    gains[u - 1].resize(ens.sample_count());
    for (int i = 0; i < ens.sample_count(); ++i) gains[u - 1][i] = ens.g_dest(u, i);
  }
  std::vector<double> p_bars(budget.p_bar.begin(), budget.p_bar.end() - 1);
  SolverConfig cfg;
  auto res = waterfill_mac_opportunistic(gains, 1.0, p_bars, cfg);
  // ergodic sum-rate at the solution
  double sum = 0;
  const int n = ens.sample_count();
  for (int i = 0; i < n; ++i) {
    double x = 0;
    for (int u = 0; u < k; ++u) x += gains[u][i] * res.powers[u][i];
    sum += std::log1p(x);
  }
  return sum / (n * std::numbers::ln2);
}

}  // namespace marc
