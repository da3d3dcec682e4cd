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

// Command-line front end: sweep, trace and bench.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "sgpip/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Writes to `path`, or stdout when it is empty or "-".
bool emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return static_cast<bool>(std::cout.flush());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

void report_notes(const std::vector<sgpip::ResultRow>& rows) {
  for (const auto& r : rows)
    if (!r.note.empty())
      std::cerr << "warning: " << r.algorithm << " failed at " << r.sweep_name << "="
                << r.sweep_value << " trial " << r.trial << ": " << r.note << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable GPIP precoding benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string algorithms;
  std::string algorithm;
  std::uint64_t seed = 0;
  int trials = -1;
  int threads = -1;

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep to CSV");
  sweep->add_option("--config", config_path, "YAML experiment file")->required();
  sweep->add_option("--out", out_path, "CSV output path (default stdout)");
  auto* seed_opt = sweep->add_option("--seed", seed, "Master seed override");
  sweep->add_option("--trials", trials, "Trial count override")->check(CLI::NonNegativeNumber);
  sweep->add_option("--algorithms", algorithms, "Comma-separated algorithm list");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  auto* trace = app.add_subcommand("trace", "Per-iteration objective of one realization");
  trace->add_option("--config", config_path, "YAML experiment file")->required();
  trace->add_option("--algorithm", algorithm, "Iterative algorithm name")->required();
  trace->add_option("--out", out_path, "CSV output path (default stdout)");

  auto* bench = app.add_subcommand("bench", "Solver timing over an n_antennas sweep");
  bench->add_option("--config", config_path, "YAML experiment file")->required();
  bench->add_option("--out", out_path, "Per-trial CSV path; summary goes to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    sgpip::ExperimentConfig config = sgpip::load_config(config_path);

    if (sweep->parsed()) {
      if (*seed_opt) config.seed = seed;
      if (trials >= 0) config.trials = trials;
      if (threads >= 0) config.threads = threads;
      if (!algorithms.empty()) config.algorithms = split_names(algorithms);
      config.validate();
      const auto rows = sgpip::run_experiment(config);
      report_notes(rows);
      if (!emit(out_path, sgpip::to_csv(rows))) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return kExitNumeric;
      }
    } else if (trace->parsed()) {
      const auto values = sgpip::run_convergence_trace(config, algorithm);
      std::ostringstream ss;
      ss << "iteration,sum_se_bps_hz\n";
      char buf[40];
      for (std::size_t t = 0; t < values.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%.9e", values[t]);
        ss << t << ',' << buf << '\n';
      }
      if (!emit(out_path, ss.str())) return kExitNumeric;
    } else if (bench->parsed()) {
      const auto result = sgpip::bench_scaling(config);
      report_notes(result.rows);
      if (!out_path.empty() && !emit(out_path, sgpip::to_csv(result.rows)))
        return kExitNumeric;
      std::printf("n_antennas,algorithm,trials,median_wall_time_ms,mean_sum_se_bps_hz\n");
      for (const auto& s : result.summary)
        std::printf("%d,%s,%d,%.9e,%.9e\n", s.n_antennas, s.algorithm.c_str(), s.trials,
                    s.median_wall_time_ms, s.mean_sum_se);
    }
  } catch (const sgpip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
