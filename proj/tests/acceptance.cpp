// Acceptance run: one PASS/FAIL line per criterion 1-8, each with its own
// wall-clock budget. Usage: acceptance <path-to-lab> <scratch-dir>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "excision/flow1d.hpp"
#include "excision/lab.hpp"
#include "excision/scalar_kit.hpp"

using namespace excision;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

// forward_time reports divergence once partial sums pass this cap.
constexpr double kDivergenceCap = 1e6;
// mu is a bisection root; just below b = a it sits within e^-100 of b, far
// under one ulp, so the open interval is tested to the root tolerance.
constexpr double kRootTol = 1e-10;

void criterion(int id, const char* title, double budget, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget;
  const bool ok = v.pass && in_time;
  if (!ok) ++failures;
  std::printf("ACCEPTANCE %d %s  %s: %s [%.1f s of %.0f s]\n", id, ok ? "PASS" : "FAIL", title,
              v.detail.c_str(), secs, budget);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Named checks must exist and pass; appends "name=residual" to detail.
bool require(const ScenarioReport& r, std::initializer_list<const char*> names, std::string& detail,
             std::size_t min_points = 1) {
  bool ok = true;
  for (const char* n : names) {
    const auto it = r.checks.find(n);
    if (it == r.checks.end()) {
      detail += std::string(" ") + r.scenario + "." + n + "=missing";
      ok = false;
      continue;
    }
    const CheckResult& c = it->second;
    ok = ok && c.pass && c.points >= min_points;
    char buf[160];
    std::snprintf(buf, sizeof buf, " %s.%s(%zu)=%.2e%s", r.scenario.c_str(), n, c.points,
                  c.max_residual, c.pass ? "" : "!");
    detail += buf;
  }
  return ok;
}

ScenarioReport run(const std::string& scenario) {
  ScenarioConfig c;
  c.scenario = scenario;
  c.trajectories = false;
  return run_scenario(c);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <lab> <scratch-dir>\n");
    return 2;
  }
  const std::string lab = argv[1];
  const std::filesystem::path scratch = argv[2];
  std::mt19937_64 rng(20261016);
  const auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  std::vector<ScenarioReport> reports;

  criterion(1, "quadrature vs closed-form forward time", 5.0, [&] {
    double worst = 0.0;
    int inf_bad = 0, compared = 0, capped_bad = 0;
    for (int i = 0; i < 200; ++i) {
      const double a = uni(-0.99, 0.99), b = uni(-0.99, 0.99);
      const double left = 0.5 * (a - 1.0);
      const double x = uni(left + 1e-3, 0.999);
      const double exact = closed_form_Tu(a, b, 0.0, x).value;
      const double numeric = forward_time(make_u_field(a, b, 0.0), x).value;
      if (exact <= kDivergenceCap) {
        worst = std::max(worst, std::abs(numeric - exact) / std::max(1.0, exact));
        ++compared;
      } else if (numeric != kInf) {
        ++capped_bad;  // past the cap the quadrature must report divergence
      }
      const double c = uni(1e-3, 1.0);
      if (closed_form_Tu(a, b, c, x).value != kInf ||
          forward_time(make_u_field(a, b, c), x).value != kInf) {
        ++inf_bad;
      }
    }
    return Outcome{worst <= 1e-8 && inf_bad == 0 && capped_bad == 0,
                   fmt("200 draws, %.0f below the 1e6 cap: worst |dT|/max(1,T) = %.2e; "
                       "finite past the cap: %.0f",
                       compared, worst, capped_bad) +
                       fmt(", c>0 not infinite: %.0f", inf_bad)};
  });

  criterion(2, "bridge carries a to b in time b-a+tau", 5.0, [&] {
    double worst_t = 0.0, worst_x = 0.0;
    for (int i = 0; i < 100; ++i) {
      double a = uni(0.01, 0.99), b = uni(0.01, 0.99);
      if (a > b) std::swap(a, b);
      if (b - a < 1e-3) b = a + 1e-3;
      const double tau = uni(0.01, 1.0);
      const ScalarField1D v = make_bridge_field(a, b, tau);
      worst_t = std::max(worst_t, std::abs(travel_time(v, a, b) - (b - a + tau)));
      worst_x = std::max(worst_x, std::abs(flow_map(v, b - a + tau, a) - b));
    }
    return Outcome{worst_t <= 1e-8 && worst_x <= 1e-8,
                   fmt("100 draws, worst time error %.2e, worst endpoint error %.2e", worst_t, worst_x)};
  });

  criterion(3, "mu identities on a 50x50 grid", 10.0, [&] {
    double worst_eq = 0.0;
    int outside = 0;
    for (int i = 0; i < 50; ++i) {
      const double a = -0.98 + 1.96 * i / 49.0;
      for (int j = 0; j < 50; ++j) {
        const double b = -0.99 + 1.98 * j / 49.0;
        const double m = mu(a, b);
        if (b >= a) {
          worst_eq = std::max(worst_eq, std::abs(m - b));
        } else if (!(m > std::max(b, 0.5 * (a - 1.0)) - kRootTol && m < a + kRootTol)) {
          ++outside;
        }
      }
    }
    return Outcome{worst_eq <= 1e-10 && outside == 0,
                   fmt("worst |mu-b| for b>=a %.2e, outside the interval (+-1e-10) for b<a: %.0f", worst_eq, outside)};
  });

  criterion(4, "ray excision, n=1 and n=2", 60.0, [&] {
    Outcome v;
    for (const char* s : {"ray-n1", "ray"}) {
      reports.push_back(run(s));
      v.pass = require(reports.back(), {"classification"}, v.detail, 10000) && v.pass;
      v.pass = require(reports.back(), {"symplecticity", "inverse_consistency"}, v.detail, 100) && v.pass;
    }
    return v;
  });

  criterion(5, "Cantor brush", 90.0, [&] {
    Outcome v;
    reports.push_back(run("cantor-brush"));
    v.pass = require(reports.back(), {"classification", "symplecticity", "inverse_consistency"},
                     v.detail, 100);
    return v;
  });

  criterion(6, "lsc pipeline, box with tail", 120.0, [&] {
    Outcome v;
    reports.push_back(run("box-tail"));
    v.pass = require(reports.back(), {"level_classification", "limit_classification", "baire_sequence"},
                     v.detail);
    return v;
  });

  criterion(7, "staged tree, ray with two horns (lab tree)", 120.0, [&] {
    const std::filesystem::path out = scratch / "tree";
    std::filesystem::remove_all(out);
    const std::string cmd = "\"" + lab + "\" tree --out \"" + out.string() + "\" > \"" +
                            (scratch / "tree.log").string() + "\" 2>&1";
    std::filesystem::create_directories(scratch);
    const int rc = std::system(cmd.c_str());
    std::ifstream in(out / "report.json");
    if (!in) return Outcome{false, "no report.json (exit " + std::to_string(rc) + ")"};
    const json j = json::parse(in);
    ScenarioReport r;
    r.scenario = "tree";
    for (const auto& [name, c] : j.items()) {
      r.checks[name] = {c.at("points").get<std::size_t>(), c.at("max_residual").get<double>(),
                        c.at("pass").get<bool>()};
    }
    Outcome v;
    v.detail = "exit " + std::to_string(rc) + ";";
    v.pass = rc == 0 && r.pass();
    v.pass = require(r, {"locality", "on_tree_escape", "symplecticity"}, v.detail) && v.pass;
    v.pass = v.pass && r.checks.at("locality").max_residual == 0.0 &&
             r.checks.at("symplecticity").max_residual <= 2e-5;
    reports.push_back(std::move(r));
    return v;
  });

  // Fresh runs for the scenarios not covered above; the conservation and
  // flatness checks of every report from 4-7 count as well.
  criterion(8, "energy conservation and flatness off N", 30.0, [&] {
    Outcome v;
    reports.push_back(run("epigraph"));
    std::size_t seen = 0;
    for (const ScenarioReport& r : reports) {
      for (const char* n : {"conservation", "flatness"}) {
        if (!r.checks.count(n)) continue;
        ++seen;
        v.pass = require(r, {n}, v.detail) && v.pass;
      }
    }
    v.pass = v.pass && seen > 0;
    return v;
  });

  std::printf("acceptance: %d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
