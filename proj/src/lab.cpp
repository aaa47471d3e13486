#include "excision/lab.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "excision/errors.hpp"
#include "excision/symflow.hpp"
#include "lab_internal.hpp"

namespace excision {

namespace {

using nlohmann::json;

json tree_to_json(const TreeSpec& t) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n[0], n[1]});
  for (const auto& e : t.edges) edges.push_back({e[0], e[1]});
  return {{"nodes", nodes},
          {"edges", edges},
          {"root", t.root},
          {"mode", t.mode == RootMode::Retract ? "retract" : "open-rooted"},
          {"w0", t.w0},
          {"eps", t.eps},
          {"u_radius", t.u_radius}};
}

TreeSpec tree_from_json(const json& j) {
  static const std::set<std::string> known{"nodes", "edges", "root", "mode", "w0", "eps", "u_radius"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw InputError("tree: unknown key '" + k + "'");
  }
  TreeSpec t;
  for (const auto& n : j.at("nodes")) t.nodes.push_back({n.at(0).get<double>(), n.at(1).get<double>()});
  for (const auto& e : j.at("edges")) {
    t.edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()});
  }
  t.root = j.value("root", std::size_t{0});
  const std::string mode = j.value("mode", std::string("open-rooted"));
  if (mode == "retract") {
    t.mode = RootMode::Retract;
  } else if (mode != "open-rooted") {
    throw InputError("tree: mode must be 'open-rooted' or 'retract'");
  }
  t.w0 = j.value("w0", t.w0);
  t.eps = j.value("eps", t.eps);
  t.u_radius = j.value("u_radius", t.u_radius);
  return t;
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  static const std::set<std::string> known{
      "scenario", "dimension", "grid", "seed", "tol", "margin", "eps", "u_scale",
      "symplectic_points", "inverse_points", "cantor_depth", "lsc_depth", "tree", "out_dir",
      "trajectories"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw InputError("config: unknown key '" + k + "'");
  }
  ScenarioConfig c;
  try {
    read(j, "scenario", c.scenario);
    read(j, "dimension", c.dimension);
    read(j, "grid", c.grid);
    read(j, "seed", c.seed);
    read(j, "tol", c.tol);
    read(j, "margin", c.margin);
    read(j, "eps", c.eps);
    read(j, "u_scale", c.u_scale);
    read(j, "symplectic_points", c.symplectic_points);
    read(j, "inverse_points", c.inverse_points);
    read(j, "cantor_depth", c.cantor_depth);
    read(j, "lsc_depth", c.lsc_depth);
    read(j, "out_dir", c.out_dir);
    read(j, "trajectories", c.trajectories);
    if (j.contains("tree") && !j.at("tree").is_null()) c.tree = tree_from_json(j.at("tree"));
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string ScenarioConfig::to_json() const {
  json j{{"scenario", scenario},
         {"dimension", dimension},
         {"grid", grid},
         {"seed", seed},
         {"tol", tol},
         {"margin", margin},
         {"eps", eps},
         {"u_scale", u_scale},
         {"symplectic_points", symplectic_points},
         {"inverse_points", inverse_points},
         {"cantor_depth", cantor_depth},
         {"lsc_depth", lsc_depth},
         {"out_dir", out_dir},
         {"trajectories", trajectories}};
  j["tree"] = tree ? tree_to_json(*tree) : json(nullptr);
  return j.dump(2);
}

void ScenarioConfig::validate() const {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end()) {
    throw InputError("unknown scenario '" + scenario + "'");
  }
  if (dimension < 1) throw InputError("dimension must be >= 1");
  if (!(tol >= 0.0) || tol > 1e-4) throw InputError("tol must lie in [0, 1e-4]");
  if (!(margin > 0.0 && margin < 0.1)) throw InputError("margin must lie in (0, 0.1)");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0, 1)");
  if (!(u_scale > 0.0 && u_scale <= 1.0)) throw InputError("u_scale must lie in (0, 1]");
  if (cantor_depth < 0 || cantor_depth > 12) throw InputError("cantor_depth must lie in [0, 12]");
  if (lsc_depth < 2 || lsc_depth > 20) throw InputError("lsc_depth must lie in [2, 20]");
  if (grid == 1) throw InputError("grid must be 0 (default) or >= 2");
  if (tree) tree->validate();
}

bool ScenarioReport::pass() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second.pass; });
}

std::string ScenarioReport::to_json() const {
  json j = json::object();
  for (const auto& [name, c] : checks) {
    j[name] = {{"points", c.points}, {"max_residual", c.max_residual}, {"pass", c.pass}};
  }
  return j.dump(2) + "\n";
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"ray",  "ray-n1", "epigraph", "cantor-brush",
                                              "box-tail", "tree", "retract", "verify-all"};
  return names;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  if (config.scenario == "verify-all") {
    ScenarioReport all;
    all.scenario = config.scenario;
    for (const auto& name : scenario_names()) {
      if (name == "verify-all") continue;
      ScenarioConfig c = config;
      c.scenario = name;
      // A tree override only makes sense for the scenario that matches its mode.
      if (c.tree && (name == "tree") != (c.tree->mode == RootMode::OpenRooted)) c.tree.reset();
      const ScenarioReport r = run_scenario(c);
      for (const auto& [k, v] : r.checks) all.checks[name + "." + k] = v;
      for (const auto& [k, v] : r.trajectories) all.trajectories[name + "_" + k] = v;
    }
    return all;
  }
  try {
    return lab::run_single(config);
  } catch (const InputError& e) {
    throw InputError(config.scenario + ": " + e.what());
  } catch (const DepthExhausted& e) {
    throw DepthExhausted(config.scenario + ": " + e.what());
  } catch (const ToleranceFailure& e) {
    throw ToleranceFailure(config.scenario + ": " + e.what(), e.partial_lower_bound);
  } catch (const InternalError& e) {
    throw InternalError(config.scenario + ": " + e.what());
  }
}

void write_report(const ScenarioConfig& config, const ScenarioReport& report) {
  if (config.out_dir.empty()) return;
  namespace fs = std::filesystem;
  const fs::path root(config.out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  {
    std::ofstream out(root / "report.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (root / "report.json").string());
    out << report.to_json();
  }
  if (!config.trajectories || report.trajectories.empty()) return;
  fs::create_directories(root / "trajectories", ec);
  if (ec) throw IoError("cannot create trajectories directory: " + ec.message());
  for (const auto& [name, rows] : report.trajectories) {
    write_trajectory_csv((root / "trajectories" / (name + ".csv")).string(), rows);
  }
}

}  // namespace excision
