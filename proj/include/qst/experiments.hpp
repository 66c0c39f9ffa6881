#pragma once

// Experiment orchestration: one runner per study (spectrum, eigenvalue
// flow, operator fidelity, adiabaticity, single evolution, fidelity sweep,
// minimal time vs distance, robustness), all emitting flat Records.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qst/effective.hpp"
#include "qst/metrics.hpp"
#include "qst/sweep.hpp"

namespace qst {

inline double pi_const() { return std::acos(-1.0); }

/// Flat experiment description. Defaults are the headline case
/// N=39, mu0=1.0J, J0=0.1J, d=5, Gamma=0, delta=0.
/// Durations are given in units of pi/J0; gamma in units of J0.
struct ExperimentConfig {
  std::string experiment = "evolve";
  int n_sites = 39;
  double mu0 = 1.0;
  double j0 = 0.1;
  int distance = 5; // d = 2l+3
  double t_max_pi_j0 = 19.0;
  std::vector<double> t_max_grid;          // pi/J0 units; empty -> per-experiment default
  std::vector<double> gamma_list = {0.0};  // units of J0
  std::vector<double> delta_list = {0.0};
  int n_realizations = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string format = "csv";
  std::string out_path; // empty -> stdout
  bool timestamp = true;

  ChainSpec chain() const { return ChainSpec{n_sites, 1.0, mu0}; }
  double t_max_internal() const { return t_max_pi_j0 * pi_const() / j0; }
  ProtocolSpec protocol() const {
    return make_protocol_for_distance(chain(), distance, j0, t_max_internal());
  }
};

inline std::vector<double> parse_number_list(const std::string& text) {
  // either "a,b,c" or a grid "lo:hi:step"
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream is(text);
    if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
      throw std::invalid_argument("bad grid syntax (want lo:hi:step): " + text);
    for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("empty number list: " + text);
  return out;
}

/// Flat key=value config file; '#' comments; unknown keys rejected.
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  if (key == "experiment") cfg.experiment = value;
  else if (key == "n_sites") cfg.n_sites = std::stoi(value);
  else if (key == "mu0") cfg.mu0 = std::stod(value);
  else if (key == "j0") cfg.j0 = std::stod(value);
  else if (key == "d" || key == "distance") cfg.distance = std::stoi(value);
  else if (key == "l") cfg.distance = 2 * std::stoi(value) + 3;
  else if (key == "t_max") cfg.t_max_pi_j0 = std::stod(value);
  else if (key == "t_max_grid") cfg.t_max_grid = parse_number_list(value);
  else if (key == "gamma") cfg.gamma_list = parse_number_list(value);
  else if (key == "delta") cfg.delta_list = parse_number_list(value);
  else if (key == "realizations") cfg.n_realizations = std::stoi(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "jobs") cfg.jobs = std::stoi(value);
  else if (key == "format") cfg.format = value;
  else if (key == "out") cfg.out_path = value;
  else if (key == "timestamp") cfg.timestamp = (value == "true" || value == "1");
  else throw std::invalid_argument("unknown config key: " + key);
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

namespace detail {

inline void add_common(Record& r, const ExperimentConfig& cfg) {
  r.set("n_sites", static_cast<std::int64_t>(cfg.n_sites));
  r.set("mu0", cfg.mu0);
  r.set("j0", cfg.j0);
  r.set("d", static_cast<std::int64_t>(cfg.distance));
}

inline std::vector<double> grid_or(const ExperimentConfig& cfg, double lo, double hi,
                                   double step) {
  if (!cfg.t_max_grid.empty()) return cfg.t_max_grid;
  std::vector<double> g;
  for (double v = lo; v <= hi + 1e-9; v += step) g.push_back(v);
  return g;
}

}  // namespace detail

/// Chain spectrum study: analytic vs numeric bound state, gap, wavevector
/// roots, then the four lowest total-Hamiltonian eigenvalues over the
/// pulse (the instantaneous-eigenenergy flow). Scalar rows carry t_j=nan.
inline std::vector<Record> run_spectrum(const ExperimentConfig& cfg) {
  const ChainSpec chain = cfg.chain();
  const MediumSpectrum numeric = diagonalize_medium(chain);
  const BoundState bound = bound_state(chain); // throws for mu0 = 0
  const WavevectorSet waves = solve_wavevectors(chain);

  double max_root_dev = 0.0;
  {
    std::vector<double> analytic;
    analytic.push_back(bound.energy);
    for (const auto& r : waves.roots) analytic.push_back(r.energy);
    std::sort(analytic.begin(), analytic.end());
    for (int i = 1; i < static_cast<int>(analytic.size()); ++i) // skip the bound pair
      max_root_dev = std::max(max_root_dev, std::abs(analytic[i] - numeric.eigenvalues(i)));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Record> records;
  const auto scalar = [&](const std::string& name, double value) {
    Record r;
    detail::add_common(r, cfg);
    r.set("t_j", nan);
    r.set("metric", name);
    r.set("value", value);
    records.push_back(std::move(r));
  };
  scalar("bound_q", bound.q);
  scalar("bound_energy_analytic", bound.energy);
  scalar("ground_energy_numeric", numeric.eigenvalues(0));
  scalar("gap_analytic", energy_gap(chain));
  // two numeric variants: the bound-state depth below the infinite-chain
  // band edge -2J, and the raw level spacing (which carries the finite-N
  // band-edge offset 2J(1 - cos(pi/N0)))
  scalar("gap_numeric_bound_depth", -2.0 * chain.hopping - numeric.eigenvalues(0));
  scalar("gap_numeric_level_spacing", numeric.eigenvalues(1) - numeric.eigenvalues(0));
  scalar("root_count", static_cast<double>(waves.roots.size()));
  scalar("max_band_energy_deviation", max_root_dev);
  scalar("resonant_mu", resonant_onsite_energy(chain));

  const ProtocolSpec spec = cfg.protocol();
  const int n_points = 501;
  for (int i = 0; i < n_points; ++i) {
    const double t = spec.t_max * i / (n_points - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_total_hamiltonian(spec, t),
                                                      Eigen::EigenvaluesOnly);
    for (int k = 0; k < 4; ++k) {
      Record r;
      detail::add_common(r, cfg);
      r.set("t_j", t);
      r.set("metric", "eigenvalue_" + std::to_string(k));
      r.set("value", es.eigenvalues()(k));
      records.push_back(std::move(r));
    }
  }
  return records;
}

/// Four lowest eigenvalues of the total Hamiltonian across the pulse,
/// one wide row per time point.
inline std::vector<Record> run_eigen_flow(const ExperimentConfig& cfg) {
  const ProtocolSpec spec = cfg.protocol();
  const int n_points = 501;
  std::vector<Record> records(n_points);
  parallel_for(n_points, cfg.jobs, [&](int i) {
    const double t = spec.t_max * i / (n_points - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_total_hamiltonian(spec, t),
                                                      Eigen::EigenvaluesOnly);
    Record r;
    detail::add_common(r, cfg);
    r.set("t_j", t);
    r.set("t_pi_j0", t / (pi_const() / cfg.j0));
    for (int k = 0; k < 4; ++k)
      r.set("e" + std::to_string(k), es.eigenvalues()(k));
    records[i] = std::move(r);
  });
  return records;
}

/// Operator fidelity of the dark-state reduction over a J0/mu0 grid for
/// several transfer distances.
inline std::vector<Record> run_operator_fidelity(const ExperimentConfig& cfg) {
  const std::vector<double> ratios = {0.02, 0.05, 0.1, 0.2, 0.4};
  const std::vector<int> distances = {5, 13, 21};
  std::vector<Record> records;
  for (int d : distances) {
    for (double ratio : ratios) {
      ProtocolSpec spec = make_protocol_for_distance(cfg.chain(), d, ratio * cfg.mu0, 1.0);
      Record r;
      r.set("n_sites", static_cast<std::int64_t>(cfg.n_sites));
      r.set("mu0", cfg.mu0);
      r.set("d", static_cast<std::int64_t>(d));
      r.set("j0_over_mu0", ratio);
      r.set("j0", ratio * cfg.mu0);
      r.set("metric", std::string("operator_fidelity"));
      r.set("value", operator_fidelity(spec));
      records.push_back(std::move(r));
    }
  }
  return records;
}

/// Adiabaticity profile A(t) over the protocol plus its closed-form peak.
inline std::vector<Record> run_adiabaticity(const ExperimentConfig& cfg) {
  const ProtocolSpec spec = cfg.protocol();
  const BoundState bound = bound_state(spec.chain);
  const double a_max = max_adiabaticity(spec, bound);
  const int n_points = 501;
  std::vector<Record> records;
  for (int i = 0; i < n_points; ++i) {
    const double t = spec.t_max * i / (n_points - 1);
    const double a = adiabaticity(spec, bound, t);
    Record r;
    detail::add_common(r, cfg);
    r.set("t_max_pi_j0", cfg.t_max_pi_j0);
    r.set("t_j", t);
    r.set("adiabaticity", a);
    r.set("adiabaticity_times_t_max", a * spec.t_max);
    r.set("a_max_closed_form", a_max);
    records.push_back(std::move(r));
  }
  return records;
}

/// One full protocol run; populations over time. Uses the master equation
/// whenever gamma > 0, otherwise pure-state evolution (the two agree for
/// gamma = 0).
inline std::vector<Record> run_evolve(const ExperimentConfig& cfg) {
  const ProtocolSpec spec = cfg.protocol();
  const double gamma = cfg.gamma_list.front() * cfg.j0;
  const double delta = cfg.delta_list.front();
  DisorderRealization disorder;
  const DisorderRealization* disorder_ptr = nullptr;
  if (delta > 0.0) {
    disorder = sample_disorder(delta, spec.chain, cfg.seed);
    disorder_ptr = &disorder;
  }
  Trajectory traj = gamma > 0.0
                        ? evolve_master(spec, disorder_ptr, gamma, site_a_density(spec))
                        : evolve_schrodinger(spec, disorder_ptr, site_a_state(spec));
  std::vector<Record> records;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    Record r;
    detail::add_common(r, cfg);
    r.set("gamma_j0", cfg.gamma_list.front());
    r.set("delta", delta);
    r.set("seed", static_cast<std::int64_t>(cfg.seed));
    r.set("dt", traj.meta.step);
    r.set("t_j", traj.times[i]);
    r.set("t_pi_j0", traj.times[i] / (pi_const() / cfg.j0));
    r.set("pop_a", traj.pop_a[i]);
    r.set("pop_b", traj.pop_b[i]);
    r.set("pop_defect", traj.pop_defect[i]);
    r.set("pop_medium", traj.pop_medium[i]);
    records.push_back(std::move(r));
  }
  return records;
}

/// Transfer fidelity vs t_max for both the full model and the effective
/// three-level model.
inline std::vector<Record> run_fidelity_sweep(const ExperimentConfig& cfg) {
  const std::vector<double> grid = detail::grid_or(cfg, 2.0, 50.0, 1.0);
  const BoundState bound = bound_state(cfg.chain());
  const int n = static_cast<int>(grid.size());
  std::vector<Record> records(2 * n);
  parallel_for(2 * n, cfg.jobs, [&](int task) {
    const bool effective = task >= n;
    const double t_pi = grid[task % n];
    ProtocolSpec spec = cfg.protocol();
    spec.t_max = t_pi * pi_const() / cfg.j0;
    StopWatch watch;
    Trajectory traj =
        effective ? evolve_effective(spec, bound, Eigen::Vector3cd(1.0, 0.0, 0.0), 51)
                  : evolve_schrodinger(spec, nullptr, site_a_state(spec), 51);
    Record r;
    detail::add_common(r, cfg);
    r.set("method", std::string(effective ? "effective" : "full"));
    r.set("t_max_pi_j0", t_pi);
    r.set("t_max_j", spec.t_max);
    r.set("fidelity", transfer_fidelity_pure(traj));
    r.set("seed", static_cast<std::int64_t>(cfg.seed));
    r.set("dt", traj.meta.step);
    r.set("wall_ms", cfg.timestamp ? watch.elapsed_ms() : 0.0);
    records[task] = std::move(r);
  });
  return records;
}

/// Minimal transfer time vs distance for each mu0 in delta-of-interest;
/// J0 is tied to mu0 by the weak-coupling ratio J0/mu0 = 0.1. Per-point
/// search failures are reported in the record, not thrown.
inline std::vector<Record> run_min_time_vs_distance(const ExperimentConfig& cfg) {
  std::vector<int> distances = {5, 7, 9, 11, 13};
  std::vector<double> mu0_values = {0.5, 1.0};
  struct Point {
    int d;
    double mu0;
  };
  std::vector<Point> points;
  for (double m : mu0_values)
    for (int d : distances) points.push_back({d, m});

  std::vector<Record> records(points.size());
  parallel_for(static_cast<int>(points.size()), cfg.jobs, [&](int i) {
    const auto [d, mu0] = points[i];
    const double j0 = 0.1 * mu0;
    ChainSpec chain{cfg.n_sites, 1.0, mu0};
    ProtocolSpec spec = make_protocol_for_distance(chain, d, j0, 1.0);
    const double pi = pi_const();
    Record r;
    r.set("n_sites", static_cast<std::int64_t>(cfg.n_sites));
    r.set("mu0", mu0);
    r.set("j0", j0);
    r.set("d", static_cast<std::int64_t>(d));
    StopWatch watch;
    try {
      const double t_min =
          minimal_transfer_time(spec, 0.005, 2.0 * pi / j0, 200.0 * pi / j0);
      r.set("t_min_j", t_min);
      r.set("t_min_pi_j0", t_min / (pi / j0));
      r.set("t_min_pi_j", t_min / pi);
      r.set("log_t_min", std::log(t_min));
      r.set("status", std::string("ok"));
    } catch (const solver_error& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.set("t_min_j", nan);
      r.set("t_min_pi_j0", nan);
      r.set("t_min_pi_j", nan);
      r.set("log_t_min", nan);
      r.set("status", std::string(e.what()));
    }
    r.set("wall_ms", cfg.timestamp ? watch.elapsed_ms() : 0.0);
    records[i] = std::move(r);
  });
  return records;
}

/// Ensemble robustness study over (delta, gamma, t_max). Each realization
/// uses seed base_seed + index and is recorded for replay. Pure-state
/// evolution is used when gamma = 0 (equivalent and much cheaper).
inline std::vector<Record> run_robustness(const ExperimentConfig& cfg) {
  if (cfg.n_realizations < 1)
    throw std::invalid_argument("run_robustness: realizations must be >= 1");
  const std::vector<double> grid = detail::grid_or(cfg, 10.0, 30.0, 2.0);
  struct Point {
    double delta, gamma_j0, t_pi;
  };
  std::vector<Point> points;
  for (double delta : cfg.delta_list)
    for (double gamma : cfg.gamma_list)
      for (double t_pi : grid) points.push_back({delta, gamma, t_pi});

  const int n_points = static_cast<int>(points.size());
  std::vector<std::vector<double>> fidelities(n_points);
  struct Task {
    int point;
    int realization;
  };
  std::vector<Task> tasks;
  for (int p = 0; p < n_points; ++p) {
    const int reps = points[p].delta > 0.0 ? cfg.n_realizations : 1;
    fidelities[p].resize(reps);
    for (int k = 0; k < reps; ++k) tasks.push_back({p, k});
  }
  std::vector<double> task_wall(tasks.size(), 0.0);

  parallel_for(static_cast<int>(tasks.size()), cfg.jobs, [&](int ti) {
    const auto [p, k] = tasks[ti];
    const auto& pt = points[p];
    ProtocolSpec spec = cfg.protocol();
    spec.t_max = pt.t_pi * pi_const() / cfg.j0;
    DisorderRealization disorder;
    const DisorderRealization* disorder_ptr = nullptr;
    if (pt.delta > 0.0) {
      disorder = sample_disorder(pt.delta, spec.chain, cfg.seed + k);
      disorder_ptr = &disorder;
    }
    StopWatch watch;
    const double gamma = pt.gamma_j0 * cfg.j0;
    double f;
    if (gamma > 0.0) {
      Trajectory traj = evolve_master(spec, disorder_ptr, gamma, site_a_density(spec), 51);
      f = transfer_fidelity_mixed(traj.final_density);
    } else {
      Trajectory traj = evolve_schrodinger(spec, disorder_ptr, site_a_state(spec), 51);
      f = transfer_fidelity_pure(traj);
    }
    fidelities[p][k] = f;
    task_wall[ti] = watch.elapsed_ms();
  });

  std::vector<double> wall(n_points, 0.0);
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) wall[tasks[ti].point] += task_wall[ti];

  std::vector<Record> records(n_points);
  for (int p = 0; p < n_points; ++p) {
    const auto& fs = fidelities[p];
    const double n = static_cast<double>(fs.size());
    const double mean = std::accumulate(fs.begin(), fs.end(), 0.0) / n;
    double var = 0.0;
    for (double f : fs) var += (f - mean) * (f - mean);
    const double stdev = fs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    Record r;
    detail::add_common(r, cfg);
    r.set("delta", points[p].delta);
    r.set("gamma_j0", points[p].gamma_j0);
    r.set("t_max_pi_j0", points[p].t_pi);
    r.set("t_max_j", points[p].t_pi * pi_const() / cfg.j0);
    r.set("n_realizations", static_cast<std::int64_t>(fs.size()));
    r.set("base_seed", static_cast<std::int64_t>(cfg.seed));
    r.set("fidelity_mean", mean);
    r.set("fidelity_std", stdev);
    r.set("fidelity_min", *std::min_element(fs.begin(), fs.end()));
    r.set("fidelity_max", *std::max_element(fs.begin(), fs.end()));
    r.set("wall_ms", cfg.timestamp ? wall[p] : 0.0);
    records[p] = std::move(r);
  }
  return records;
}

inline std::vector<Record> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "spectrum") return run_spectrum(cfg);
  if (cfg.experiment == "eigen-flow") return run_eigen_flow(cfg);
  if (cfg.experiment == "operator-fidelity") return run_operator_fidelity(cfg);
  if (cfg.experiment == "adiabaticity") return run_adiabaticity(cfg);
  if (cfg.experiment == "evolve") return run_evolve(cfg);
  if (cfg.experiment == "fidelity-sweep") return run_fidelity_sweep(cfg);
  if (cfg.experiment == "min-time-vs-distance") return run_min_time_vs_distance(cfg);
  if (cfg.experiment == "robustness") return run_robustness(cfg);
  throw std::invalid_argument("unknown experiment: " + cfg.experiment);
}

}  // namespace qst
