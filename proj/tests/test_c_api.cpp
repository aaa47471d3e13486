// Exercises the shared library through excision.h only.
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "excision/excision.h"

TEST_CASE("status codes and errors") {
  CHECK(std::string(exc_status_name(EXC_OK)) == "ok");
  CHECK(std::string(exc_status_name(EXC_ERR_EXCISED)) == "excised");
  CHECK(exc_mu(0.1, 0.5, nullptr) == EXC_ERR_INPUT);
  CHECK(std::string(exc_last_error()).find("out") != std::string::npos);
  double t = 0.0;
  CHECK(exc_closed_form_tu(0.2, 0.5, 1.5, 0.3, &t) == EXC_ERR_INPUT);
  CHECK(std::string(exc_last_error()).size() > 0);
  double v = 0.0;
  CHECK(exc_bridge_velocity(0.5, 0.2, 0.1, 0.3, &v) == EXC_ERR_INPUT);
}

TEST_CASE("one-dimensional flows") {
  double closed = 0.0, quad = 0.0;
  REQUIRE(exc_closed_form_tu(0.2, 0.5, 0.0, 0.7, &closed) == EXC_OK);
  REQUIRE(exc_quadrature_tu(0.2, 0.5, 0.0, 0.7, &quad) == EXC_OK);
  CHECK(closed == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(quad == doctest::Approx(closed).epsilon(1e-9));
  REQUIRE(exc_closed_form_tu(0.2, 0.5, 0.3, 0.7, &closed) == EXC_OK);
  CHECK(std::isinf(closed));
  double m = 0.0;
  REQUIRE(exc_mu(0.5, 0.0, &m) == EXC_OK);
  CHECK(m == doctest::Approx(0.09680180080448681).epsilon(1e-10));
  double v = 0.0;
  REQUIRE(exc_bridge_velocity(0.2, 0.5, 0.1, 0.7, &v) == EXC_OK);
  CHECK(v == 1.0);
}

TEST_CASE("ray field handle") {
  exc_field* f = nullptr;
  REQUIRE(exc_ray_field_create(2, 0.5, &f) == EXC_OK);
  REQUIRE(exc_field_dim(f) == 4);
  const double far[4] = {3.0, 0.0, 4.0, 0.0};
  double value = 1.0, grad[4] = {1, 1, 1, 1};
  REQUIRE(exc_field_value(f, far, &value, grad) == EXC_OK);
  CHECK(value == 0.0);
  CHECK(grad[0] == 0.0);

  // On the ray: excised; next to it: survives and round-trips.
  const double on[4] = {0.0, 0.0, 0.3, 0.0};
  double out[4], back[4];
  CHECK(exc_field_time1(f, on, 1, 0.0, out) == EXC_ERR_EXCISED);
  const double off[4] = {0.05, 0.0, 0.3, 0.02};
  REQUIRE(exc_field_time1(f, off, 1, 1e-11, out) == EXC_OK);
  REQUIRE(exc_field_time1(f, out, -1, 1e-11, back) == EXC_OK);
  for (int i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(off[i]).epsilon(1e-7));
  CHECK(exc_field_time1(f, off, 0, 0.0, out) == EXC_ERR_INPUT);

  double end[4], elapsed = 0.0;
  exc_flow_status flow = EXC_FLOW_TOLERANCE;
  REQUIRE(exc_field_integrate(f, on, 1.0, 0.0, end, &elapsed, &flow) == EXC_OK);
  CHECK(flow == EXC_FLOW_ESCAPED);
  CHECK(elapsed <= 1.0);
  double r = 1.0;
  REQUIRE(exc_field_symplectic_residual(f, off, 1e-11, &r) == EXC_OK);
  CHECK(r < 1e-5);
  exc_field_free(f);
  exc_field_free(nullptr);
}

TEST_CASE("staged trees") {
  exc_staged* s = nullptr;
  CHECK(exc_tree_example("no-such-tree", &s) == EXC_ERR_INPUT);
  REQUIRE(exc_tree_example("ray-with-two-horns", &s) == EXC_OK);
  CHECK(exc_staged_stage_count(s) == 3);
  CHECK(exc_staged_components(s) == 1);
  const double far[2] = {50.0, -40.0};
  double out[2];
  REQUIRE(exc_staged_map(s, far, 1, 0.0, out) == EXC_OK);
  CHECK(out[0] == far[0]);
  CHECK(out[1] == far[1]);
  exc_staged_free(s);

  // A single segment rooted at the origin.
  const double nodes[4] = {0.0, 0.0, 1.0, 0.0};
  const size_t edges[2] = {0, 1};
  REQUIRE(exc_tree_create(nodes, 2, edges, 1, 0, 0, &s) == EXC_OK);
  CHECK(exc_staged_stage_count(s) == 1);
  exc_staged_free(s);
  CHECK(exc_tree_create(nodes, 2, edges, 1, 7, 0, &s) != EXC_OK);
}

TEST_CASE("configs, runs and reports") {
  exc_config* c = nullptr;
  CHECK(exc_config_create("bogus", &c) == EXC_ERR_INPUT);
  CHECK(exc_config_from_json("{\"scenario\": \"ray\", \"colour\": 3}", &c) == EXC_ERR_INPUT);
  CHECK(exc_config_from_json("not json", &c) == EXC_ERR_INPUT);
  REQUIRE(exc_config_from_json("{\"scenario\": \"ray-n1\", \"seed\": 4}", &c) == EXC_OK);
  CHECK(exc_config_set_tol(c, -1.0) == EXC_ERR_INPUT);
  REQUIRE(exc_config_set_grid(c, 20) == EXC_OK);
  const std::string js = exc_config_json(c);
  CHECK(js.find("\"ray-n1\"") != std::string::npos);
  CHECK(js.find("\"grid\": 20") != std::string::npos);
  CHECK(std::string(exc_config_out_dir(c)).empty());

  exc_report *r1 = nullptr, *r2 = nullptr;
  REQUIRE(exc_run(c, &r1) == EXC_OK);
  REQUIRE(exc_run(c, &r2) == EXC_OK);
  CHECK(exc_report_pass(r1) == 1);
  CHECK(std::string(exc_report_json(r1)) == exc_report_json(r2));
  REQUIRE(exc_report_check_count(r1) > 0);
  const char* name = nullptr;
  size_t points = 0;
  int pass = 0;
  REQUIRE(exc_report_check(r1, 0, &name, &points, nullptr, &pass) == EXC_OK);
  CHECK(std::string(name) == "backward_totality");
  CHECK(pass == 1);
  CHECK(exc_report_check(r1, 999, &name, nullptr, nullptr, nullptr) == EXC_ERR_INPUT);
  CHECK(exc_report_write(c, r1) == EXC_ERR_INPUT);

  const auto dir = std::filesystem::temp_directory_path() / "excision_c_api_test";
  std::filesystem::remove_all(dir);
  REQUIRE(exc_config_set_out_dir(c, dir.c_str()) == EXC_OK);
  REQUIRE(exc_report_write(c, r1) == EXC_OK);
  CHECK(std::filesystem::exists(dir / "report.json"));
  std::ifstream csv(dir / "trajectories" / "axis_excised.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,x1,y1");
  std::filesystem::remove_all(dir);

  exc_report_free(r1);
  exc_report_free(r2);
  exc_config_free(c);
}
