#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sparselab/systems.hpp"

namespace sparselab {

struct SweepConfig {
  SystemDescriptor system = SystemDescriptor::ap(101, 3);
  /// "count" (normalized count within [1/2, 2]), "density" or "colouring".
  std::string target = "count";
  /// density target: the property is witnessed when the adversary's free
  /// subset has density below delta.
  double delta = 0.5;
  int colours = 2;
  /// Multipliers C of |X|^{-α_S}.
  std::vector<double> c_grid = {1.0};
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  /// Adversary evaluation budget.
  std::uint64_t budget = 100000;
  unsigned threads = 1;
  /// Record wall time in the millis column (off keeps output byte-stable).
  bool timing = false;

  static SweepConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct StatValue {
  std::string name;
  double value = 0.0;
  std::optional<bool> pass;
};

struct ExperimentRecord {
  std::size_t c_index = 0;
  double c = 0.0;
  double p = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<StatValue> stats;
  /// The target's verdict for this trial.
  bool success = false;
  double millis = 0.0;
};

struct SweepResult {
  SweepConfig config;
  std::string system;
  Index n = 0;
  double alpha = 0.0;
  std::vector<ExperimentRecord> records;
  nlohmann::json summary;
};

/// Seed of trial `trial` at grid point `c_index`.
std::uint64_t trial_seed(std::uint64_t master, std::size_t c_index, std::size_t trial);

SweepResult run_sweep(const SweepConfig& config);

/// Columns: system, n, alpha_s, C, p, trial, seed, stat_name, stat_value, pass, millis.
void write_csv(std::ostream& out, const SweepResult& result);
nlohmann::json sweep_json(const SweepResult& result);

/// Percentile bootstrap interval for a success frequency.
std::pair<double, double> bootstrap_interval(const std::vector<bool>& outcomes, std::uint64_t seed,
                                             std::size_t resamples = 2000, double level = 0.95);

struct CheckResult {
  bool pass = false;
  nlohmann::json report;
};

/// Dispatch for "system", "properties", "conditions", "dense-model" and
/// "oracle". Throws std::invalid_argument for unknown targets or arguments.
CheckResult run_check(const std::string& target, const nlohmann::json& args);

}  // namespace sparselab
