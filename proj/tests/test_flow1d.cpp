#include <cmath>
#include <map>
#include <utility>

#include "doctest.h"
#include "excision/errors.hpp"
#include "excision/flow1d.hpp"
#include "oracles.hpp"

using namespace excision;

TEST_CASE("forward and backward times") {
  const ScalarField1D one = make_constant_field(1.0, 0.0, 1.0);
  CHECK(forward_time(one, 0.25).value == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(backward_time(one, 0.25).value == doctest::Approx(-0.25).epsilon(1e-12));

  const TimeOfFlight t = forward_time(make_u_field(0.2, 0.5, 0.0), 0.7);
  CHECK(t.value == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(t.value > 0.0);

  const TimeOfFlight blocked = forward_time(make_u_field(0.2, 0.5, 0.3), 0.7);
  CHECK(blocked.value == kInf);

  for (double x : {-0.9, -0.2, 0.3, 0.95}) {
    CHECK(backward_time(make_u_field(0.2, 0.5, 0.0), x).value == -kInf);
    CHECK(backward_time(make_u_field(-0.4, -1.0, 0.7), x).value == -kInf);
  }
  const TimeOfFlight zb = forward_time(make_u_field(0.2, 0.5, 0.0), -0.5);
  CHECK(zb.value == kInf);
  CHECK(zb.mode == TimeMode::ZeroBlocked);

  CHECK(backward_time(make_bridge_field(0.2, 0.5, 0.1), 0.1).value ==
        doctest::Approx(-0.1).epsilon(1e-10));
  // Total crossing time of the bridge: (a - 0) + (b - a + tau) + (1 - b).
  CHECK(forward_time(make_bridge_field(0.2, 0.5, 0.1), 0.05).value ==
        doctest::Approx(0.95 + 0.1).epsilon(1e-9));
}

TEST_CASE("divergent improper integral is reported as infinite") {
  // v = 1 - x: log divergence at the right end.
  ScalarField1D v{[](double x) { return 1.0 - x; }, [](double) { return -1.0; }, 0.0, 1.0};
  CHECK(forward_time(v, 0.5).value == kInf);
  // v = sqrt(1 - x): integrable singularity, T = 2 sqrt(1 - x).
  ScalarField1D w{[](double x) { return std::sqrt(1.0 - x); },
                  [](double x) { return -0.5 / std::sqrt(1.0 - x); }, 0.0, 1.0};
  CHECK(forward_time(w, 0.19).value == doctest::Approx(1.8).epsilon(1e-8));
}

TEST_CASE("flow map") {
  const ScalarField1D one = make_constant_field(1.0, 0.0, 1.0);
  CHECK(flow_map(one, 0.3, 0.2) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(flow_map(one, -0.1, 0.2) == doctest::Approx(0.1).epsilon(1e-11));
  CHECK_THROWS_AS(flow_map(one, 0.8, 0.2), FlowDomainError);
  try {
    flow_map(one, 0.8, 0.2);
  } catch (const FlowDomainError& e) {
    CHECK(e.backward_time == doctest::Approx(-0.2));
    CHECK(e.forward_time == doctest::Approx(0.8));
  }

  const ScalarField1D u = make_u_field(0.2, 0.5, 0.0);
  CHECK(flow_map(u, 5.0, -0.7) == -0.7);

  const ScalarField1D bridge = make_bridge_field(0.2, 0.5, 0.1);
  CHECK(flow_map(bridge, 0.4, 0.2) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(flow_map(bridge, -0.4, 0.5) == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("flow map agrees with an RK4 reference") {
  const ScalarField1D bridge = make_bridge_field(0.2, 0.5, 0.3);
  const double ref = oracle::rk4_scalar(bridge.eval, 0.25, 0.3, 20000);
  CHECK(flow_map(bridge, 0.3, 0.25) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("time shift and semigroup") {
  const ScalarField1D fields[] = {make_u_field(0.2, 0.5, 0.0), make_u_field(-0.3, 0.1, 0.0),
                                  make_bridge_field(0.1, 0.6, 0.2)};
  for (const ScalarField1D& v : fields) {
    for (int i = 0; i < 20; ++i) {
      const auto s = oracle::halton(i, 3);
      const double x = v.lo == 0.0 ? 0.05 + 0.5 * s[0] : 0.1 + 0.5 * s[0];
      const double T = forward_time(v, x).value;
      REQUIRE(std::isfinite(T));
      const double t = 0.6 * T * s[1];
      const double y = flow_map(v, t, x);
      CHECK(std::abs(forward_time(v, y).value - (T - t)) <= 1e-8);

      const double r = 0.3 * T * s[2];
      const double two = flow_map(v, r, y);
      const double once = flow_map(v, t + r, x);
      CHECK(std::abs(two - once) <= 1e-8);
    }
  }
}

TEST_CASE("no premature escape") {
  const ScalarField1D v = make_u_field(0.0, 0.2, 0.0);
  const double x = 0.1;
  const double T = forward_time(v, x).value;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double y = flow_map(v, T - eps, x);
    CHECK(y < 1.0);
    CHECK(y > x);
  }
}

TEST_CASE("closed form of T_u") {
  CHECK(closed_form_Tu(0.2, 0.5, 0.0, 0.7).value == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(closed_form_Tu(0.2, 0.5, 0.0, 0.7).mode == TimeMode::ClosedForm);
  // Independent 30-digit quadrature of the correction integral.
  CHECK(closed_form_Tu(0.2, 0.5, 0.0, 0.1).value ==
        doctest::Approx(1.8000055021622535).epsilon(1e-11));
  CHECK(closed_form_Tu(0.2, 1.0, 0.0, 0.5).value == kInf);
  CHECK(closed_form_Tu(0.2, 0.5, 0.3, 0.7).value == kInf);
  CHECK(closed_form_Tu(0.2, 0.5, 0.0, -0.4).value == kInf);
  CHECK_THROWS_AS(closed_form_Tu(0.2, 0.5, 1.5, 0.3), InputError);
}

TEST_CASE("quadrature agrees with the closed form") {
  for (int i = 0; i < 200; ++i) {
    const auto s = oracle::halton(i, 3);
    const double a = -0.6 + 1.5 * s[0];
    const double b = -1.0 + 1.9 * s[1];
    const double left = 0.5 * (a - 1.0);
    const double x = left + 0.2 + (0.99 - left - 0.2) * s[2];
    const double numeric = forward_time(make_u_field(a, b, 0.0), x).value;
    const double exact = closed_form_Tu(a, b, 0.0, x).value;
    INFO("a=" << a << " b=" << b << " x=" << x);
    CHECK(std::abs(numeric - exact) <= 1e-8 * std::max(1.0, exact));
    CHECK(forward_time(make_u_field(a, b, 0.25), x).value == kInf);
    CHECK(closed_form_Tu(a, b, 0.25, x).value == kInf);
  }
}

TEST_CASE("slow divergence behind a bulky first panel") {
  // The first geometric panel holds ~2.5e5 of the time, the c > 0 tail adds
  // ~0.14 per panel forever.
  const ScalarField1D u = make_u_field(0.45919618060813172, -0.57103411596229292, 0.62944);
  CHECK(forward_time(u, -0.21964979061523832).value == kInf);
}

TEST_CASE("mu") {
  CHECK(mu(0.1, 0.5) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(mu(-0.3, -0.3) == doctest::Approx(-0.3).epsilon(1e-11));
  const double m = mu(0.5, 0.0);
  CHECK(m > 0.0);
  CHECK(m < 0.5);
  // 30-digit bisection on an independent quadrature.
  CHECK(m == doctest::Approx(0.09680180080448681).epsilon(1e-10));
  CHECK(closed_form_Tu(0.5, 0.0, 0.0, m).value == doctest::Approx(1.0).epsilon(1e-9));
  for (double b : {-0.9, -0.5, 0.0, 0.3}) {
    CHECK(mu(0.4, b) > std::max(b, 0.5 * (0.4 - 1.0)));
  }
  CHECK(mu(0.4, 0.0) < mu(0.4, 0.2));
}

TEST_CASE("classification identity on a 20^4 grid") {
  std::map<std::pair<int, int>, double> mus;
  long checked = 0;
  for (int ia = 0; ia < 20; ++ia) {
    const double a = -0.95 + 1.9 * ia / 19.0;
    for (int ib = 0; ib < 20; ++ib) {
      const double b = -1.0 + 2.0 * ib / 19.0;
      for (int ic = 0; ic < 20; ++ic) {
        const double c = ic / 19.0;
        for (int ix = 0; ix < 20; ++ix) {
          const double x = -0.975 + 0.1 * ix;
          const bool fast = closed_form_Tu(a, b, c, x).value <= 1.0;
          bool predicted = false;
          if (b < 1.0 && c == 0.0) {
            auto it = mus.find({ia, ib});
            if (it == mus.end()) it = mus.emplace(std::make_pair(ia, ib), mu(a, b)).first;
            predicted = it->second <= x;
          }
          if (fast != predicted) {
            FAIL_CHECK("mismatch at a=" << a << " b=" << b << " c=" << c << " x=" << x);
          }
          ++checked;
        }
      }
    }
  }
  CHECK(checked == 160000);
}
