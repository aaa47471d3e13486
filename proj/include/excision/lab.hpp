#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "excision/trees.hpp"

namespace excision {

struct CheckResult {
  std::size_t points = 0;
  double max_residual = 0.0;
  bool pass = false;
};

/// Scenario knobs. Zero for grid, tol and the point counts means "use the
/// scenario default".
struct ScenarioConfig {
  std::string scenario = "ray";
  std::size_t dimension = 2;  // n of the ray model; phase space is R^(2n)
  std::size_t grid = 0;
  std::uint64_t seed = 1;
  double tol = 0.0;
  double margin = 1e-3;
  double eps = 0.5;      // ray cutoff overhang
  double u_scale = 1.0;  // ray neighbourhood U, scaled about the ray
  std::size_t symplectic_points = 0;
  std::size_t inverse_points = 0;
  int cantor_depth = 6;
  std::size_t lsc_depth = 12;
  std::optional<TreeSpec> tree;  // tree / retract; defaults to the shipped examples
  std::string out_dir;           // empty: nothing is written
  bool trajectories = true;

  /// Missing keys keep their defaults; unknown keys are an InputError.
  static ScenarioConfig from_json(const std::string& text);
  std::string to_json() const;
  void validate() const;
};

struct ScenarioReport {
  std::string scenario;
  std::map<std::string, CheckResult> checks;
  /// Trajectory name -> rows (t, z...).
  std::map<std::string, std::vector<std::vector<double>>> trajectories;

  bool pass() const;
  /// check name -> {points, max_residual, pass}; keys sorted.
  std::string to_json() const;
};

const std::vector<std::string>& scenario_names();

ScenarioReport run_scenario(const ScenarioConfig& config);

/// Writes report.json and trajectories/*.csv under config.out_dir.
void write_report(const ScenarioConfig& config, const ScenarioReport& report);

}  // namespace excision
