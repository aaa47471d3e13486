#include "excision/excision.h"

#include <cmath>
#include <string>

#include "excision/errors.hpp"
#include "excision/flow1d.hpp"
#include "excision/lab.hpp"
#include "excision/scalar_kit.hpp"
#include "excision/symflow.hpp"
#include "excision/trees.hpp"

struct exc_field {
  excision::HamiltonianPtr F;
};

struct exc_staged {
  excision::StagedExcision S;
};

struct exc_config {
  excision::ScenarioConfig cfg;
  std::string json;
};

struct exc_report {
  excision::ScenarioReport report;
  std::string json;
  std::vector<std::string> names;
};

namespace {

using namespace excision;

thread_local std::string last_error;

exc_status fail(exc_status s, const char* what) {
  last_error = what;
  return s;
}

// Runs f, mapping library exceptions onto status codes.
template <class Fn>
exc_status guard(Fn&& f) {
  try {
    f();
    return EXC_OK;
  } catch (const InputError& e) {
    return fail(EXC_ERR_INPUT, e.what());
  } catch (const FlowDomainError& e) {
    return fail(EXC_ERR_FLOW_DOMAIN, e.what());
  } catch (const ExcisedPointError& e) {
    return fail(EXC_ERR_EXCISED, e.what());
  } catch (const DepthExhausted& e) {
    return fail(EXC_ERR_DEPTH_EXHAUSTED, e.what());
  } catch (const ToleranceFailure& e) {
    return fail(EXC_ERR_TOLERANCE, e.what());
  } catch (const StencilError& e) {
    return fail(EXC_ERR_STENCIL, e.what());
  } catch (const IoError& e) {
    return fail(EXC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(EXC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EXC_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw InputError(std::string(what) + " is NULL");
}

IntegratorOptions options(double tol) {
  IntegratorOptions o;
  if (tol > 0.0) o.tol = tol;
  return o;
}

int direction_sign(int direction) {
  if (direction != 1 && direction != -1) throw InputError("direction must be +1 or -1");
  return direction;
}

}  // namespace

extern "C" {

const char* exc_last_error(void) { return last_error.c_str(); }

const char* exc_status_name(exc_status status) {
  switch (status) {
    case EXC_OK: return "ok";
    case EXC_ERR_INPUT: return "input";
    case EXC_ERR_FLOW_DOMAIN: return "flow-domain";
    case EXC_ERR_EXCISED: return "excised";
    case EXC_ERR_DEPTH_EXHAUSTED: return "depth-exhausted";
    case EXC_ERR_TOLERANCE: return "tolerance";
    case EXC_ERR_STENCIL: return "stencil";
    case EXC_ERR_INTERNAL: return "internal";
    case EXC_ERR_IO: return "io";
  }
  return "unknown";
}

exc_status exc_closed_form_tu(double a, double b, double c, double x, double* time) {
  return guard([&] {
    need(time, "time");
    *time = closed_form_Tu(a, b, c, x).value;
  });
}

exc_status exc_quadrature_tu(double a, double b, double c, double x, double* time) {
  return guard([&] {
    need(time, "time");
    *time = forward_time(make_u_field(a, b, c), x).value;
  });
}

exc_status exc_mu(double a, double b, double* out) {
  return guard([&] {
    need(out, "out");
    *out = mu(a, b);
  });
}

exc_status exc_bridge_velocity(double a, double b, double tau, double x, double* v) {
  return guard([&] {
    need(v, "v");
    *v = bridge_velocity(a, b, tau, x);
  });
}

exc_status exc_ray_field_create(size_t n, double eps, exc_field** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    HamiltonianPtr F = n == 1 ? HamiltonianPtr(build_ray_hamiltonian_n1(eps))
                              : HamiltonianPtr(build_ray_hamiltonian(n, eps));
    *out = new exc_field{std::move(F)};
  });
}

void exc_field_free(exc_field* field) { delete field; }

size_t exc_field_dim(const exc_field* field) { return field ? field->F->dim() : 0; }

exc_status exc_field_value(const exc_field* field, const double* z, double* value,
                           double* grad) {
  return guard([&] {
    need(field, "field");
    need(z, "z");
    need(value, "value");
    const std::span<const double> zs(z, field->F->dim());
    if (grad) {
      *value = field->F->value_and_gradient(zs, std::span<double>(grad, field->F->dim()));
    } else {
      *value = field->F->value(zs);
    }
  });
}

exc_status exc_field_integrate(const exc_field* field, const double* z, double t, double tol,
                               double* endpoint, double* elapsed, exc_flow_status* flow) {
  return guard([&] {
    need(field, "field");
    need(z, "z");
    need(endpoint, "endpoint");
    const std::size_t d = field->F->dim();
    const FlowOutcome o = integrate(*field->F, std::span<const double>(z, d), t, options(tol));
    std::copy(o.endpoint.begin(), o.endpoint.end(), endpoint);
    if (elapsed) *elapsed = o.elapsed;
    if (flow) {
      *flow = o.status == FlowStatus::Completed      ? EXC_FLOW_COMPLETED
              : o.status == FlowStatus::EscapedChart ? EXC_FLOW_ESCAPED
                                                     : EXC_FLOW_TOLERANCE;
    }
  });
}

exc_status exc_field_time1(const exc_field* field, const double* z, int direction, double tol,
                           double* out) {
  return guard([&] {
    need(field, "field");
    need(z, "z");
    need(out, "out");
    const std::span<const double> zs(z, field->F->dim());
    const Point r = direction_sign(direction) > 0 ? time1_map(*field->F, zs, options(tol))
                                                  : inverse_time1_map(*field->F, zs, options(tol));
    std::copy(r.begin(), r.end(), out);
  });
}

exc_status exc_field_symplectic_residual(const exc_field* field, const double* z, double tol,
                                         double* residual) {
  return guard([&] {
    need(field, "field");
    need(z, "z");
    need(residual, "residual");
    const BatchMap map = time1_batch(*field->F, 1.0, options(tol));
    *residual = check_symplectic(map, std::span<const double>(z, field->F->dim())).residual;
  });
}

exc_status exc_tree_create(const double* nodes, size_t n_nodes, const size_t* edges,
                           size_t n_edges, size_t root, int retract, exc_staged** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    if (n_nodes) need(nodes, "nodes");
    if (n_edges) need(edges, "edges");
    TreeSpec t;
    for (size_t i = 0; i < n_nodes; ++i) t.nodes.push_back({nodes[2 * i], nodes[2 * i + 1]});
    for (size_t i = 0; i < n_edges; ++i) t.edges.push_back({edges[2 * i], edges[2 * i + 1]});
    t.root = root;
    t.mode = retract ? RootMode::Retract : RootMode::OpenRooted;
    *out = new exc_staged{retract ? retract_tree(t) : excise_tree(t)};
  });
}

exc_status exc_tree_example(const char* name, exc_staged** out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    *out = nullptr;
    const std::string n(name);
    if (n == "ray-with-two-horns") {
      *out = new exc_staged{excise_tree(ray_with_two_horns())};
    } else if (n == "segment-retract") {
      *out = new exc_staged{retract_tree(segment_retract())};
    } else {
      throw InputError("unknown tree example '" + n + "'");
    }
  });
}

void exc_staged_free(exc_staged* staged) { delete staged; }

size_t exc_staged_stage_count(const exc_staged* staged) {
  return staged ? staged->S.stages().size() : 0;
}

size_t exc_staged_components(const exc_staged* staged) {
  return staged ? staged->S.components() : 0;
}

exc_status exc_staged_map(const exc_staged* staged, const double w[2], int direction, double tol,
                          double out[2]) {
  return guard([&] {
    need(staged, "staged");
    need(w, "w");
    need(out, "out");
    const Point p{w[0], w[1]};
    const Point r = direction_sign(direction) > 0 ? staged->S.forward(p, options(tol))
                                                  : staged->S.inverse(p, options(tol));
    out[0] = r[0];
    out[1] = r[1];
  });
}

size_t exc_scenario_count(void) { return scenario_names().size(); }

const char* exc_scenario_name(size_t index) {
  const auto& names = scenario_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

exc_status exc_config_create(const char* scenario, exc_config** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    ScenarioConfig c;
    if (scenario) c.scenario = scenario;
    c.validate();
    *out = new exc_config{std::move(c), {}};
  });
}

exc_status exc_config_from_json(const char* json, exc_config** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    *out = new exc_config{ScenarioConfig::from_json(json), {}};
  });
}

void exc_config_free(exc_config* config) { delete config; }

exc_status exc_config_set_scenario(exc_config* config, const char* scenario) {
  return guard([&] {
    need(config, "config");
    need(scenario, "scenario");
    ScenarioConfig c = config->cfg;
    c.scenario = scenario;
    c.validate();
    config->cfg = std::move(c);
  });
}

exc_status exc_config_set_tol(exc_config* config, double tol) {
  return guard([&] {
    need(config, "config");
    ScenarioConfig c = config->cfg;
    c.tol = tol;
    c.validate();
    config->cfg = std::move(c);
  });
}

exc_status exc_config_set_grid(exc_config* config, size_t grid) {
  return guard([&] {
    need(config, "config");
    ScenarioConfig c = config->cfg;
    c.grid = grid;
    c.validate();
    config->cfg = std::move(c);
  });
}

exc_status exc_config_set_seed(exc_config* config, uint64_t seed) {
  return guard([&] {
    need(config, "config");
    config->cfg.seed = seed;
  });
}

exc_status exc_config_set_out_dir(exc_config* config, const char* dir) {
  return guard([&] {
    need(config, "config");
    config->cfg.out_dir = dir ? dir : "";
  });
}

const char* exc_config_out_dir(const exc_config* config) {
  return config ? config->cfg.out_dir.c_str() : "";
}

const char* exc_config_json(exc_config* config) {
  if (!config) return nullptr;
  config->json = config->cfg.to_json();
  return config->json.c_str();
}

exc_status exc_run(const exc_config* config, exc_report** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    auto* r = new exc_report{run_scenario(config->cfg), {}, {}};
    r->json = r->report.to_json();
    for (const auto& [name, c] : r->report.checks) r->names.push_back(name);
    *out = r;
  });
}

void exc_report_free(exc_report* report) { delete report; }

int exc_report_pass(const exc_report* report) { return report && report->report.pass() ? 1 : 0; }

size_t exc_report_check_count(const exc_report* report) {
  return report ? report->names.size() : 0;
}

exc_status exc_report_check(const exc_report* report, size_t index, const char** name,
                            size_t* points, double* max_residual, int* pass) {
  return guard([&] {
    need(report, "report");
    if (index >= report->names.size()) throw InputError("check index out of range");
    const std::string& n = report->names[index];
    const CheckResult& c = report->report.checks.at(n);
    if (name) *name = n.c_str();
    if (points) *points = c.points;
    if (max_residual) *max_residual = c.max_residual;
    if (pass) *pass = c.pass ? 1 : 0;
  });
}

const char* exc_report_json(const exc_report* report) {
  return report ? report->json.c_str() : nullptr;
}

exc_status exc_report_write(const exc_config* config, const exc_report* report) {
  return guard([&] {
    need(config, "config");
    need(report, "report");
    if (config->cfg.out_dir.empty()) throw InputError("config has no out_dir");
    write_report(config->cfg, report->report);
  });
}

}  // extern "C"
