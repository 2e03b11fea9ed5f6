#include "marc/experiment.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace marc {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

struct KeyValues {
  std::map<std::string, std::string> kv;
  std::vector<std::string> errors;

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  std::optional<double> number(const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    try {
      std::size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (...) {
      errors.push_back("bad number for " + key + ": '" + it->second + "'");
      return std::nullopt;
    }
  }
};

KeyValues parse_kv(const std::string& text) {
  KeyValues out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      out.errors.push_back("line " + std::to_string(lineno) + ": expected key=value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) {
      out.errors.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    out.kv[key] = val;
  }
  return out;
}

}  // namespace

ConfigResult validate_config(const std::string& text) {
  ConfigResult out;
  KeyValues kvs = parse_kv(text);
  ExperimentConfig& c = out.config;

  // defaults
  c.geometry.gamma = 3.0;
  c.budget.theta = 0.5;
  c.ensemble_n = 20000;
  c.seed = 1;

  if (auto v = kvs.number("gamma")) c.geometry.gamma = *v;
  if (auto v = kvs.number("theta")) c.budget.theta = *v;
  if (auto v = kvs.number("ensemble.n")) c.ensemble_n = static_cast<int>(*v);
  if (auto v = kvs.number("ensemble.seed")) c.seed = static_cast<std::uint64_t>(*v);
  if (auto v = kvs.number("certificate.tol")) c.certificate_tol = *v;
  if (kvs.has("output.path")) c.output_path = kvs.kv["output.path"];

  if (auto v = kvs.number("solver.power_tol")) c.solver.power_tol = *v;
  if (auto v = kvs.number("solver.kkt_tol")) c.solver.kkt_tol = *v;
  if (auto v = kvs.number("solver.iter_tol")) c.solver.iter_tol = *v;
  if (auto v = kvs.number("solver.max_iters")) c.solver.max_iters = static_cast<int>(*v);
  if (auto v = kvs.number("solver.alpha_tol")) c.solver.alpha_tol = *v;

  int source_count = 0;
  if (auto v = kvs.number("geometry.source.count")) source_count = static_cast<int>(*v);
  if (source_count <= 0) {
    out.errors.push_back("missing geometry (geometry.source.count)");
  } else if (source_count > kMaxUsers) {
    out.errors.push_back("geometry.source.count exceeds " + std::to_string(kMaxUsers));
  } else {
    for (int u = 1; u <= source_count; ++u) {
      std::string base = "geometry.source." + std::to_string(u);
      auto x = kvs.number(base + ".x");
      auto y = kvs.number(base + ".y");
      if (!x || !y) out.errors.push_back("missing " + base + ".x/.y");
      c.geometry.sources.push_back({x.value_or(0), y.value_or(0)});
    }
  }
  {
    auto x = kvs.number("geometry.destination.x");
    auto y = kvs.number("geometry.destination.y");
    if (!x || !y) out.errors.push_back("missing geometry.destination.x/.y");
    c.geometry.destination = {x.value_or(2.0), y.value_or(0.0)};
  }
  if (auto v = kvs.number("geometry.relay.y")) c.relay_y = *v;
  if (auto v = kvs.number("geometry.relay.x.start")) c.relay_x_start = *v;
  if (auto v = kvs.number("geometry.relay.x.stop")) c.relay_x_stop = *v;
  if (auto v = kvs.number("geometry.relay.x.points")) c.relay_points = static_cast<int>(*v);

  c.budget.p_bar.assign(source_count > 0 ? source_count + 1 : 2, 1.0);
  for (int u = 1; u <= source_count; ++u)
    if (auto v = kvs.number("budget.source." + std::to_string(u))) c.budget.p_bar[u - 1] = *v;
  if (auto v = kvs.number("budget.relay")) c.budget.p_bar.back() = *v;

  // validation proper
  if (!(c.geometry.gamma > 0)) out.errors.push_back("gamma must be > 0");
  if (!(c.budget.theta > 0 && c.budget.theta < 1)) out.errors.push_back("theta out of (0,1)");
  if (c.ensemble_n < 1) out.errors.push_back("ensemble.n must be >= 1");
  if (c.relay_points < 1) out.errors.push_back("geometry.relay.x.points must be >= 1");
  for (double p : c.budget.p_bar)
    if (!(p >= 0)) out.errors.push_back("budgets must be >= 0");
  if (c.relay_points > 1 && c.relay_x_stop <= c.relay_x_start)
    out.errors.push_back("relay sweep: stop must exceed start");
  if (out.errors.empty()) {
    // reject colocations anywhere along the sweep
    Geometry g = c.geometry;
    for (int p = 0; p < c.relay_points; ++p) {
      double t = c.relay_points == 1
                     ? 0.0
                     : static_cast<double>(p) / (c.relay_points - 1);
      g.relay = {c.relay_x_start + t * (c.relay_x_stop - c.relay_x_start), c.relay_y};
      try {
        g.validate();
      } catch (const std::exception& e) {
        out.errors.push_back(std::string("geometry: ") + e.what() + " at sweep point " +
                             std::to_string(p));
        break;
      }
    }
  }
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "geometry.source.count = " << geometry.sources.size() << "\n";
  for (std::size_t u = 0; u < geometry.sources.size(); ++u) {
    os << "geometry.source." << u + 1 << ".x = " << geometry.sources[u].x << "\n";
    os << "geometry.source." << u + 1 << ".y = " << geometry.sources[u].y << "\n";
  }
  os << "geometry.destination.x = " << geometry.destination.x << "\n";
  os << "geometry.destination.y = " << geometry.destination.y << "\n";
  os << "geometry.relay.y = " << relay_y << "\n";
  os << "geometry.relay.x.start = " << relay_x_start << "\n";
  os << "geometry.relay.x.stop = " << relay_x_stop << "\n";
  os << "geometry.relay.x.points = " << relay_points << "\n";
  os << "gamma = " << geometry.gamma << "\n";
  os << "theta = " << budget.theta << "\n";
  for (std::size_t u = 0; u + 1 < budget.p_bar.size(); ++u)
    os << "budget.source." << u + 1 << " = " << budget.p_bar[u] << "\n";
  os << "budget.relay = " << budget.p_bar.back() << "\n";
  os << "ensemble.n = " << ensemble_n << "\n";
  os << "ensemble.seed = " << seed << "\n";
  os << "solver.power_tol = " << solver.power_tol << "\n";
  os << "solver.kkt_tol = " << solver.kkt_tol << "\n";
  os << "solver.iter_tol = " << solver.iter_tol << "\n";
  os << "solver.max_iters = " << solver.max_iters << "\n";
  os << "solver.alpha_tol = " << solver.alpha_tol << "\n";
  os << "certificate.tol = " << certificate_tol << "\n";
  if (!output_path.empty()) os << "output.path = " << output_path << "\n";
  return os.str();
}

SweepResult run_sweep(const ExperimentConfig& config) {
  SweepResult out;
  Geometry geom = config.geometry;

  // baseline is independent of the relay position: compute once
  geom.relay = {config.relay_x_start, config.relay_y};
  auto base_ens = sample_ensemble(geom, config.ensemble_n, config.seed);
  double baseline = mac_baseline_sum_capacity(base_ens, config.budget);

  for (int p = 0; p < config.relay_points; ++p) {
    double t = config.relay_points == 1 ? 0.0 : static_cast<double>(p) / (config.relay_points - 1);
    double rx = config.relay_x_start + t * (config.relay_x_stop - config.relay_x_start);
    SweepRow row;
    row.relay_x = rx;
    row.mac_baseline = baseline;
    geom.relay = {rx, config.relay_y};
    try {
      auto ens = std::make_shared<FadingEnsemble>(
          sample_ensemble(geom, config.ensemble_n, config.seed));
      SolverReport df = optimal_df_sum_rate(ens, config.budget, config.solver);
      SolverReport ob = optimal_cutset_sum_rate(ens, config.budget, config.solver, &df.policy);
      auto cert = sum_capacity_certificate(df, ob, config.certificate_tol);
      row.df_sum_rate = df.sum_rate;
      row.df_case = df.label.to_string();
      row.cutset_sum_rate = ob.sum_rate;
      row.cutset_case = ob.label.to_string();
      row.capacity_achieved = cert.achieved;
      row.solver_iterations = df.iterations + ob.iterations;
    } catch (const std::exception& e) {
      row.diagnostic = true;
      row.diagnostic_msg = e.what();
      out.any_diagnostics = true;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& os) {
  os << "relay_x,df_sum_rate,df_case,cutset_sum_rate,cutset_case,mac_baseline,"
        "capacity_achieved,solver_iterations\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  for (const SweepRow& r : sweep.rows) {
    if (r.diagnostic) {
      os << num(r.relay_x) << ",nan,diagnostic:" << r.diagnostic_msg << ",nan,,"
         << num(r.mac_baseline) << ",0,0\n";
      continue;
    }
    os << num(r.relay_x) << "," << num(r.df_sum_rate) << "," << r.df_case << ","
       << num(r.cutset_sum_rate) << "," << r.cutset_case << "," << num(r.mac_baseline) << ","
       << (r.capacity_achieved ? 1 : 0) << "," << r.solver_iterations << "\n";
  }
}

}  // namespace marc
