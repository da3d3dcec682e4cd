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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgpip/channel.hpp"
#include "sgpip/gpip.hpp"

namespace sgpip {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  // Scalar values; the swept field holds the first sweep value.
  int n_antennas = 16;
  int n_users = 4;
  double power_dbm = 30.0;
  double kappa = 0.0;
  int cov_rank = 1;

  double fc_ghz = 10.5;
  double bandwidth_hz = 300e6;
  double noise_figure_db = 5.0;
  double h_bs_m = 10.0;
  double h_ut_m = 1.5;
  double angular_spread_rad = std::numbers::pi / 6.0;
  double distance_min_m = 20.0;
  double distance_max_m = 100.0;
  bool shadowing_enabled = true;
  double shadowing_std_db = 7.82;
  double element_spacing = 0.5;

  std::vector<std::string> algorithms = {"sgpip", "rzf", "mrt"};
  int trials = 10;
  std::uint64_t seed = 1;
  double tol = 1e-2;
  int t_max = 100;
  int threads = 0;     // 0: hardware concurrency
  bool timing = true;  // false writes wall_time_ms = 0

  std::string sweep_name = "power_dbm";
  std::vector<double> sweep_values = {30.0};

  // Copy with the swept field set to `value`.
  ExperimentConfig at(double value) const;
  // Throws ConfigError naming the first offending field.
  void validate() const;
};

const std::vector<std::string>& known_algorithms();
bool is_iterative(const std::string& algorithm);

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);

// One Monte Carlo draw seen by every algorithm of a trial.
struct Scenario {
  std::vector<UserGeometry> users;
  ChannelRealization channel;
  CsitRealization csit;
  double P = 0.0;
  double sigma2 = 0.0;
};

// Deterministic in (point, seed, trial): stream `trial` of Philox(seed).
Scenario draw_scenario(const ExperimentConfig& point, std::uint64_t seed,
                       std::uint64_t trial);

struct AlgorithmOutcome {
  double sum_se = 0.0;     // on the true channel
  double sum_se_lb = 0.0;  // robust lower bound on (H_hat, Phi); NaN for DPC
  double wall_time_ms = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<double> trace;
  Precoder precoder;  // empty for DPC bounds
};

AlgorithmOutcome run_algorithm(const std::string& algorithm,
                               const Scenario& scenario,
                               const ExperimentConfig& point);

struct ResultRow {
  std::string sweep_name;
  double sweep_value = 0.0;
  std::string algorithm;
  int trial = 0;
  std::uint64_t seed = 0;
  double sum_se = 0.0;
  double sum_se_lb = 0.0;
  double wall_time_ms = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string note;  // error text of a failed solve, not written to CSV
};

// Rows in (sweep value, trial, algorithm) order independent of threading.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

extern const char* const kCsvHeader;
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);

// Objective per iteration for trial 0 at the first sweep value.
std::vector<double> run_convergence_trace(const ExperimentConfig& config,
                                          const std::string& algorithm);

struct BenchSummary {
  int n_antennas = 0;
  std::string algorithm;
  int trials = 0;
  double median_wall_time_ms = 0.0;
  double mean_sum_se = 0.0;
};

struct BenchResult {
  std::vector<ResultRow> rows;
  std::vector<BenchSummary> summary;
};

// Serial runs over an n_antennas sweep; one untimed warm-up solve per
// (N, algorithm) precedes the timed trials.
BenchResult bench_scaling(const ExperimentConfig& config);

}  // namespace sgpip
