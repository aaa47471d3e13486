// lab: runs a certification scenario through the C interface.
//   lab <scenario> [--config FILE] [--tol T] [--grid N] [--out DIR] [--seed S]
// Exit status: 0 all checks pass, 1 some check failed, 2 bad input, 3 other
// errors.
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "excision/excision.h"

namespace {

int die(exc_status s) {
  std::fprintf(stderr, "lab: %s error: %s\n", exc_status_name(s), exc_last_error());
  return s == EXC_ERR_INPUT ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  std::string scenarios;
  for (size_t i = 0; i < exc_scenario_count(); ++i) {
    scenarios += (i ? ", " : "") + std::string(exc_scenario_name(i));
  }
  CLI::App app{"Symplectic excision scenarios: " + scenarios, "lab"};
  std::string scenario, config_file, out_dir;
  double tol = 0.0;
  std::size_t grid = 0;
  std::uint64_t seed = 0;
  app.add_option("scenario", scenario, "Scenario name")->required();
  app.add_option("--config", config_file, "JSON config (ScenarioConfig keys)")->check(CLI::ExistingFile);
  auto* tol_opt = app.add_option("--tol", tol, "Integrator tolerance (0: scenario default)");
  auto* grid_opt = app.add_option("--grid", grid, "Grid resolution (0: scenario default)");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", out_dir, "Write report.json and trajectories/ here");
  CLI11_PARSE(app, argc, argv);

  exc_config* cfg = nullptr;
  exc_status s;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    std::stringstream text;
    text << in.rdbuf();
    if (!in) {
      std::fprintf(stderr, "lab: cannot read %s\n", config_file.c_str());
      return 2;
    }
    s = exc_config_from_json(text.str().c_str(), &cfg);
  } else {
    s = exc_config_create(nullptr, &cfg);
  }
  if (s != EXC_OK) return die(s);
  // Command-line values win over the config file.
  if ((s = exc_config_set_scenario(cfg, scenario.c_str())) != EXC_OK ||
      (*tol_opt && (s = exc_config_set_tol(cfg, tol)) != EXC_OK) ||
      (*grid_opt && (s = exc_config_set_grid(cfg, grid)) != EXC_OK) ||
      (*seed_opt && (s = exc_config_set_seed(cfg, seed)) != EXC_OK) ||
      (!out_dir.empty() && (s = exc_config_set_out_dir(cfg, out_dir.c_str())) != EXC_OK)) {
    exc_config_free(cfg);
    return die(s);
  }

  exc_report* report = nullptr;
  if ((s = exc_run(cfg, &report)) != EXC_OK) {
    exc_config_free(cfg);
    return die(s);
  }
  for (size_t i = 0; i < exc_report_check_count(report); ++i) {
    const char* name = nullptr;
    size_t points = 0;
    double residual = 0.0;
    int pass = 0;
    exc_report_check(report, i, &name, &points, &residual, &pass);
    std::printf("%s  %-40s points=%-6zu max_residual=%.3e\n", pass ? "PASS" : "FAIL", name, points,
                residual);
  }
  const int pass = exc_report_pass(report);
  std::printf("%s: %s\n", scenario.c_str(), pass ? "all checks pass" : "FAILED");

  if (*exc_config_out_dir(cfg) && (s = exc_report_write(cfg, report)) != EXC_OK) {
    exc_report_free(report);
    exc_config_free(cfg);
    return die(s);
  }
  exc_report_free(report);
  exc_config_free(cfg);
  return pass ? 0 : 1;
}
