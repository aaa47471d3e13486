#ifndef EXCISION_H
#define EXCISION_H

/* C interface to the excision library. Objects are opaque handles owned by
 * the caller and released with the matching *_free. Every fallible call
 * returns an exc_status; on failure exc_last_error() holds a message for the
 * calling thread until its next failing call. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EXC_API __declspec(dllexport)
#else
#define EXC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum exc_status {
  EXC_OK = 0,
  EXC_ERR_INPUT = 1,
  EXC_ERR_FLOW_DOMAIN = 2,
  EXC_ERR_EXCISED = 3,
  EXC_ERR_DEPTH_EXHAUSTED = 4,
  EXC_ERR_TOLERANCE = 5,
  EXC_ERR_STENCIL = 6,
  EXC_ERR_INTERNAL = 7,
  EXC_ERR_IO = 8
} exc_status;

/* Outcome of a trajectory integration. */
typedef enum exc_flow_status {
  EXC_FLOW_COMPLETED = 0,
  EXC_FLOW_ESCAPED = 1,
  EXC_FLOW_TOLERANCE = 2
} exc_flow_status;

typedef struct exc_field exc_field;
typedef struct exc_staged exc_staged;
typedef struct exc_config exc_config;
typedef struct exc_report exc_report;

EXC_API const char* exc_last_error(void);
EXC_API const char* exc_status_name(exc_status status);

/* -- one-dimensional flows -------------------------------------------------- */

/* Forward time of u(a, b, c; .) from x, by the closed form and by
 * quadrature. +inf when the point never reaches the end. */
EXC_API exc_status exc_closed_form_tu(double a, double b, double c, double x, double* time);
EXC_API exc_status exc_quadrature_tu(double a, double b, double c, double x, double* time);
EXC_API exc_status exc_mu(double a, double b, double* out);
EXC_API exc_status exc_bridge_velocity(double a, double b, double tau, double x, double* v);

/* -- Hamiltonian fields ---------------------------------------------------- */

/* Ray model on R^(2n): the time-1 map excises {p = 0, y = 0, x >= 0}. */
EXC_API exc_status exc_ray_field_create(size_t n, double eps, exc_field** out);
EXC_API void exc_field_free(exc_field* field);
EXC_API size_t exc_field_dim(const exc_field* field);
/* grad may be NULL; otherwise it receives dim entries. */
EXC_API exc_status exc_field_value(const exc_field* field, const double* z, double* value,
                                   double* grad);
/* Integrates for signed time t. endpoint receives dim entries (the last
 * point reached); elapsed and flow may be NULL. */
EXC_API exc_status exc_field_integrate(const exc_field* field, const double* z, double t,
                                       double tol, double* endpoint, double* elapsed,
                                       exc_flow_status* flow);
/* Time-1 map (direction +1) or its inverse (-1); EXC_ERR_EXCISED when the
 * point leaves the chart first. */
EXC_API exc_status exc_field_time1(const exc_field* field, const double* z, int direction,
                                   double tol, double* out);
EXC_API exc_status exc_field_symplectic_residual(const exc_field* field, const double* z,
                                                 double tol, double* residual);

/* -- staged tree excision -------------------------------------------------- */

/* nodes: n_nodes (x, y) pairs; edges: n_edges index pairs. retract != 0
 * keeps the root as the retraction point, otherwise the root is removed. */
EXC_API exc_status exc_tree_create(const double* nodes, size_t n_nodes, const size_t* edges,
                                   size_t n_edges, size_t root, int retract, exc_staged** out);
/* The shipped examples: "ray-with-two-horns" and "segment-retract". */
EXC_API exc_status exc_tree_example(const char* name, exc_staged** out);
EXC_API void exc_staged_free(exc_staged* staged);
EXC_API size_t exc_staged_stage_count(const exc_staged* staged);
EXC_API size_t exc_staged_components(const exc_staged* staged);
/* Composed time-1 map on the plane (direction +1 forward, -1 inverse). */
EXC_API exc_status exc_staged_map(const exc_staged* staged, const double w[2], int direction,
                                  double tol, double out[2]);

/* -- scenarios --------------------------------------------------------------- */

EXC_API size_t exc_scenario_count(void);
EXC_API const char* exc_scenario_name(size_t index);

EXC_API exc_status exc_config_create(const char* scenario, exc_config** out);
/* A JSON object with the ScenarioConfig keys; unknown keys are rejected. */
EXC_API exc_status exc_config_from_json(const char* json, exc_config** out);
EXC_API void exc_config_free(exc_config* config);
EXC_API exc_status exc_config_set_scenario(exc_config* config, const char* scenario);
EXC_API exc_status exc_config_set_tol(exc_config* config, double tol);
EXC_API exc_status exc_config_set_grid(exc_config* config, size_t grid);
EXC_API exc_status exc_config_set_seed(exc_config* config, uint64_t seed);
EXC_API exc_status exc_config_set_out_dir(exc_config* config, const char* dir);
/* Empty when nothing is to be written. */
EXC_API const char* exc_config_out_dir(const exc_config* config);
/* The effective configuration as JSON; the string lives until the next call
 * on this config or its release. */
EXC_API const char* exc_config_json(exc_config* config);

EXC_API exc_status exc_run(const exc_config* config, exc_report** out);
EXC_API void exc_report_free(exc_report* report);
EXC_API int exc_report_pass(const exc_report* report);
EXC_API size_t exc_report_check_count(const exc_report* report);
/* Check by index, in name order. Any output pointer may be NULL. */
EXC_API exc_status exc_report_check(const exc_report* report, size_t index, const char** name,
                                    size_t* points, double* max_residual, int* pass);
/* report.json contents; owned by the report. */
EXC_API const char* exc_report_json(const exc_report* report);
/* Writes report.json and trajectories/ under the config's out_dir. */
EXC_API exc_status exc_report_write(const exc_config* config, const exc_report* report);

#ifdef __cplusplus
}
#endif

#endif
