// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "sgpip/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "sgpip/baselines.hpp"
#include "sgpip/convergent.hpp"
#include "sgpip/metrics.hpp"

namespace sgpip {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kSweepable = {"n_antennas", "n_users", "power_dbm",
                                             "kappa", "cov_rank"};

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& field, const char* what) {
  if (!node.IsScalar()) throw ConfigError(field, std::string("expected ") + what);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, std::string("expected ") + what);
  }
}

double finite_double(const YAML::Node& node, const std::string& field) {
  const double v = scalar_as<double>(node, field, "a number");
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

int as_int(double v, const std::string& field) {
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(field, "expected an integer");
  return static_cast<int>(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

struct Solve {
  SolverResult result;
  SubspaceProblem problem;
};

SubspaceProblem problem_for(const std::string& algorithm, const Scenario& sc,
                            int cov_rank) {
  const CMat& Hh = sc.csit.H_hat;
  if (algorithm == "sgpip" || algorithm == "convergent_sgpip")
    return build_subspace_problem_perfect(Hh, sc.P, sc.sigma2);
  if (algorithm == "sgpip_cov" || algorithm == "convergent_sgpip_cov")
    return build_subspace_problem_cov(Hh, sc.csit.Phi, cov_rank, sc.P, sc.sigma2);
  if (algorithm == "gpip_full") return build_subspace_problem_fulldim(Hh, sc.P, sc.sigma2);
  return build_subspace_problem_fulldim(Hh, sc.csit.Phi, sc.P, sc.sigma2);
}

}  // namespace

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {
      "sgpip", "sgpip_cov", "gpip_full", "gpip_full_cov", "convergent_sgpip",
      "convergent_sgpip_cov", "mrt", "rzf", "zf", "zfdpc", "zfdpc_wf"};
  return names;
}

bool is_iterative(const std::string& algorithm) {
  return algorithm == "sgpip" || algorithm == "sgpip_cov" || algorithm == "gpip_full" ||
         algorithm == "gpip_full_cov" || algorithm == "convergent_sgpip" ||
         algorithm == "convergent_sgpip_cov";
}

ExperimentConfig ExperimentConfig::at(double value) const {
  ExperimentConfig c = *this;
  if (sweep_name == "n_antennas") c.n_antennas = static_cast<int>(value);
  else if (sweep_name == "n_users") c.n_users = static_cast<int>(value);
  else if (sweep_name == "power_dbm") c.power_dbm = value;
  else if (sweep_name == "kappa") c.kappa = value;
  else if (sweep_name == "cov_rank") c.cov_rank = static_cast<int>(value);
  else throw ConfigError("sweep", "unknown sweep variable " + sweep_name);
  c.sweep_values = {value};
  return c;
}

void ExperimentConfig::validate() const {
  if (std::find(kSweepable.begin(), kSweepable.end(), sweep_name) == kSweepable.end())
    throw ConfigError("sweep", "unknown sweep variable " + sweep_name);
  if (sweep_values.empty()) throw ConfigError(sweep_name, "sweep list is empty");
  for (std::size_t i = 0; i < sweep_values.size(); ++i) {
    const std::string field = sweep_name + "[" + std::to_string(i) + "]";
    const double v = sweep_values[i];
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    if (sweep_name == "n_antennas" || sweep_name == "n_users" || sweep_name == "cov_rank")
      as_int(v, field);
    const ExperimentConfig p = at(v);
    auto where = [&](const std::string& key) {
      return key == sweep_name ? field : key;
    };
    if (p.n_users < 1) throw ConfigError(where("n_users"), "must be at least 1");
    if (p.n_antennas < p.n_users)
      throw ConfigError(where("n_antennas"), "must be at least n_users");
    if (!(p.kappa >= 0.0 && p.kappa <= 1.0))
      throw ConfigError(where("kappa"), "must lie in [0, 1]");
    if (p.cov_rank < 1 || p.cov_rank > p.n_antennas)
      throw ConfigError(where("cov_rank"), "must lie in [1, n_antennas]");
  }
  if (!(fc_ghz > 0.0)) throw ConfigError("fc_ghz", "must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz", "must be positive");
  if (!(h_bs_m > 0.0)) throw ConfigError("h_bs_m", "must be positive");
  if (!(h_ut_m > 0.0)) throw ConfigError("h_ut_m", "must be positive");
  if (!(angular_spread_rad >= 0.0 && angular_spread_rad <= std::numbers::pi))
    throw ConfigError("angular_spread_rad", "must lie in [0, pi]");
  if (!(distance_min_m > 0.0 && distance_min_m <= distance_max_m))
    throw ConfigError("distance_range_m", "expected 0 < min <= max");
  if (!(shadowing_std_db >= 0.0)) throw ConfigError("shadowing_std_db", "must be nonnegative");
  if (!(element_spacing > 0.0)) throw ConfigError("element_spacing", "must be positive");
  if (algorithms.empty()) throw ConfigError("algorithms", "must not be empty");
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    const auto& known = known_algorithms();
    if (std::find(known.begin(), known.end(), algorithms[i]) == known.end())
      throw ConfigError("algorithms[" + std::to_string(i) + "]",
                        "unknown algorithm " + algorithms[i]);
    if (std::find(algorithms.begin(), algorithms.begin() + static_cast<long>(i),
                  algorithms[i]) != algorithms.begin() + static_cast<long>(i))
      throw ConfigError("algorithms[" + std::to_string(i) + "]",
                        "duplicate algorithm " + algorithms[i]);
  }
  if (trials < 0) throw ConfigError("trials", "must be nonnegative");
  if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
  if (t_max < 1) throw ConfigError("t_max", "must be at least 1");
  if (threads < 0) throw ConfigError("threads", "must be nonnegative");
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("malformed YAML: ") + e.what());
  }
  ExperimentConfig c;
  if (root.IsNull()) {
    c.validate();
    return c;
  }
  if (!root.IsMap()) throw ConfigError("<root>", "expected a mapping of keys");

  bool swept = false;
  for (const auto& entry : root) {
    const std::string key = entry.first.as<std::string>();
    const YAML::Node& v = entry.second;

    if (std::find(kSweepable.begin(), kSweepable.end(), key) != kSweepable.end()) {
      std::vector<double> values;
      if (v.IsSequence()) {
        if (swept) throw ConfigError(key, "only one field may be a sweep list");
        swept = true;
        for (std::size_t i = 0; i < v.size(); ++i)
          values.push_back(finite_double(v[i], key + "[" + std::to_string(i) + "]"));
        if (values.empty()) throw ConfigError(key, "sweep list is empty");
        c.sweep_name = key;
        c.sweep_values = values;
      } else {
        values.push_back(finite_double(v, key));
      }
      const double first = values.front();
      if (key == "n_antennas") c.n_antennas = as_int(first, key);
      else if (key == "n_users") c.n_users = as_int(first, key);
      else if (key == "power_dbm") c.power_dbm = first;
      else if (key == "kappa") c.kappa = first;
      else c.cov_rank = as_int(first, key);
      continue;
    }

    if (key == "fc_ghz") c.fc_ghz = finite_double(v, key);
    else if (key == "bandwidth_hz") c.bandwidth_hz = finite_double(v, key);
    else if (key == "noise_figure_db") c.noise_figure_db = finite_double(v, key);
    else if (key == "h_bs_m") c.h_bs_m = finite_double(v, key);
    else if (key == "h_ut_m") c.h_ut_m = finite_double(v, key);
    else if (key == "angular_spread_rad") c.angular_spread_rad = finite_double(v, key);
    else if (key == "distance_range_m") {
      if (!v.IsSequence() || v.size() != 2)
        throw ConfigError(key, "expected [min, max]");
      c.distance_min_m = finite_double(v[0], key + "[0]");
      c.distance_max_m = finite_double(v[1], key + "[1]");
    } else if (key == "shadowing_enabled") c.shadowing_enabled = scalar_as<bool>(v, key, "a boolean");
    else if (key == "shadowing_std_db") c.shadowing_std_db = finite_double(v, key);
    else if (key == "element_spacing") c.element_spacing = finite_double(v, key);
    else if (key == "algorithms") {
      c.algorithms.clear();
      if (v.IsSequence()) {
        for (std::size_t i = 0; i < v.size(); ++i)
          c.algorithms.push_back(
              scalar_as<std::string>(v[i], key + "[" + std::to_string(i) + "]", "a name"));
      } else {
        c.algorithms = split_list(scalar_as<std::string>(v, key, "a list of names"));
      }
    } else if (key == "trials") c.trials = as_int(finite_double(v, key), key);
    else if (key == "seed") c.seed = scalar_as<std::uint64_t>(v, key, "an unsigned 64-bit integer");
    else if (key == "tol") c.tol = finite_double(v, key);
    else if (key == "t_max") c.t_max = as_int(finite_double(v, key), key);
    else if (key == "threads") c.threads = as_int(finite_double(v, key), key);
    else if (key == "timing") c.timing = scalar_as<bool>(v, key, "a boolean");
    else throw ConfigError(key, "unknown key");
  }
  if (!swept) c.sweep_values = {c.power_dbm};
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Scenario draw_scenario(const ExperimentConfig& p, std::uint64_t seed,
                       std::uint64_t trial) {
  RngStream rng(seed, trial);
  Scenario sc;
  const UlaGeometry array{p.n_antennas, p.element_spacing};
  std::vector<ChannelCovariance> covs;
  covs.reserve(static_cast<std::size_t>(p.n_users));
  for (int k = 0; k < p.n_users; ++k) {
    UserGeometry u;
    u.distance_m = rng.uniform(p.distance_min_m, p.distance_max_m);
    u.azimuth_rad = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    u.angular_spread_rad = p.angular_spread_rad;
    const double shadow = p.shadowing_enabled ? p.shadowing_std_db * rng.normal() : 0.0;
    const double loss_db = pathloss_umi_nlos(p.fc_ghz, u.distance_m, p.h_bs_m, p.h_ut_m);
    covs.push_back(one_ring_covariance(array, u, db_to_linear(-(loss_db + shadow))));
    sc.users.push_back(u);
  }
  sc.channel = draw_channel(std::move(covs), rng);
  sc.csit = imperfect_csit(sc.channel, p.kappa, rng);
  sc.P = dbm_to_watt(p.power_dbm);
  sc.sigma2 = dbm_to_watt(noise_power_dbm(p.bandwidth_hz, p.noise_figure_db));
  return sc;
}

AlgorithmOutcome run_algorithm(const std::string& algorithm, const Scenario& sc,
                               const ExperimentConfig& p) {
  AlgorithmOutcome out;
  const CMat& H = sc.channel.H;
  const CMat& Hh = sc.csit.H_hat;
  const auto start = std::chrono::steady_clock::now();

  if (algorithm == "zfdpc" || algorithm == "zfdpc_wf") {
    out.sum_se = zf_dpc_rate(H, sc.P, sc.sigma2, algorithm == "zfdpc_wf");
    out.sum_se_lb = kNaN;
  } else {
    if (is_iterative(algorithm)) {
      const SubspaceProblem problem = problem_for(algorithm, sc, p.cov_rank);
      const StackedWeights init =
          rzf_init(problem, Hh, rzf_alpha(p.n_users, sc.P, sc.sigma2));
      const SolverOptions options{p.tol, p.t_max, InverseMode::kShermanMorrison};
      SolverResult r = algorithm.starts_with("convergent")
                           ? convergent_s_gpip(problem, init, options)
                           : s_gpip(problem, init, options);
      out.precoder = std::move(r.precoder);
      out.iterations = r.iterations;
      out.converged = r.converged;
      out.trace = std::move(r.objective_trace);
    } else if (algorithm == "mrt") {
      out.precoder = mrt(Hh);
    } else if (algorithm == "rzf") {
      out.precoder = rzf(Hh, rzf_alpha(p.n_users, sc.P, sc.sigma2));
    } else if (algorithm == "zf") {
      out.precoder = zf(Hh);
    } else {
      throw ConfigError("algorithm", "unknown algorithm " + algorithm);
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  out.wall_time_ms =
      p.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  if (out.precoder.size() > 0) {
    out.sum_se = sum_se(out.precoder, H, sc.P, sc.sigma2);
    out.sum_se_lb = sum_se_lower_bound(out.precoder, Hh, sc.csit.Phi, sc.P, sc.sigma2);
  }
  return out;
}

namespace {

std::vector<ResultRow> run_trial(const ExperimentConfig& point, const ExperimentConfig& base,
                                 double sweep_value, int trial) {
  const Scenario sc = draw_scenario(point, base.seed, static_cast<std::uint64_t>(trial));
  std::vector<ResultRow> rows;
  rows.reserve(point.algorithms.size());
  for (const std::string& name : point.algorithms) {
    ResultRow row;
    row.sweep_name = base.sweep_name;
    row.sweep_value = sweep_value;
    row.algorithm = name;
    row.trial = trial;
    row.seed = base.seed;
    try {
      const AlgorithmOutcome o = run_algorithm(name, sc, point);
      row.sum_se = o.sum_se;
      row.sum_se_lb = o.sum_se_lb;
      row.wall_time_ms = o.wall_time_ms;
      row.iterations = o.iterations;
      row.converged = o.converged;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      row.sum_se = kNaN;
      row.sum_se_lb = kNaN;
      row.converged = false;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n_points = config.sweep_values.size();
  const std::size_t n_trials = static_cast<std::size_t>(config.trials);
  const std::size_t n_tasks = n_points * n_trials;
  if (n_tasks == 0) return {};

  std::vector<ExperimentConfig> points;
  for (double v : config.sweep_values) points.push_back(config.at(v));

  std::vector<std::vector<ResultRow>> slots(n_tasks);
  std::vector<std::exception_ptr> failures(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t pi = t / n_trials;
      const int trial = static_cast<int>(t % n_trials);
      try {
        slots[t] = run_trial(points[pi], config, config.sweep_values[pi], trial);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };

  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_tasks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<ResultRow> rows;
  rows.reserve(n_tasks * config.algorithms.size());
  for (auto& slot : slots)
    for (auto& row : slot) rows.push_back(std::move(row));
  return rows;
}

const char* const kCsvHeader =
    "sweep_name,sweep_value,algorithm,trial,seed,sum_se_bps_hz,sum_se_lb_bps_hz,"
    "wall_time_ms,iterations,converged";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.sweep_name << ',' << format_real(r.sweep_value) << ',' << r.algorithm << ','
        << r.trial << ',' << r.seed << ',' << format_real(r.sum_se) << ','
        << format_real(r.sum_se_lb) << ',' << format_real(r.wall_time_ms) << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream ss;
  write_csv(ss, rows);
  return ss.str();
}

std::vector<double> run_convergence_trace(const ExperimentConfig& config,
                                          const std::string& algorithm) {
  config.validate();
  if (!is_iterative(algorithm))
    throw ConfigError("algorithm", algorithm + " is not an iterative precoder");
  const ExperimentConfig point = config.at(config.sweep_values.front());
  const Scenario sc = draw_scenario(point, config.seed, 0);
  return run_algorithm(algorithm, sc, point).trace;
}

BenchResult bench_scaling(const ExperimentConfig& config) {
  config.validate();
  if (config.sweep_name != "n_antennas")
    throw ConfigError("n_antennas", "bench needs an n_antennas sweep list");
  BenchResult out;
  if (config.trials == 0) return out;

  for (double v : config.sweep_values) {
    ExperimentConfig point = config.at(v);
    point.timing = true;
    const Scenario warm = draw_scenario(point, config.seed, 0);
    for (const std::string& name : point.algorithms) {
      try {
        (void)run_algorithm(name, warm, point);
      } catch (const NumericError&) {
      }
    }
    std::vector<ResultRow> rows;
    for (int t = 0; t < config.trials; ++t) {
      auto trial_rows = run_trial(point, config, v, t);
      for (auto& r : trial_rows) rows.push_back(std::move(r));
    }
    for (const std::string& name : point.algorithms) {
      std::vector<double> times;
      double se_total = 0.0;
      int se_count = 0;
      for (const ResultRow& r : rows) {
        if (r.algorithm != name) continue;
        times.push_back(r.wall_time_ms);
        if (std::isfinite(r.sum_se)) {
          se_total += r.sum_se;
          ++se_count;
        }
      }
      out.summary.push_back({point.n_antennas, name, static_cast<int>(times.size()),
                             median(times), se_count > 0 ? se_total / se_count : kNaN});
    }
    for (auto& r : rows) out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace sgpip
