#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stdd/error.hpp"
#include "stdd/nonlinearity.hpp"

using namespace stdd;
using doctest::Approx;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidParameter;
}

}  // namespace

TEST_CASE("Poincare constants") {
  CHECK(unit_poincare_constant() == Approx(1.0 / (std::numbers::pi * std::numbers::pi)));
  CHECK(poincare_constant(0.5) == Approx(0.25 / (std::numbers::pi * std::numbers::pi)));
  CHECK(poincare_constant(build_mesh(8, 0.25)) == Approx(unit_poincare_constant()));
}

TEST_CASE("heat coefficients") {
  const Nonlinearity nl = builtin_heat();
  CHECK(nl.alpha(0.3, 5.0, 2.0) == 2.0);
  CHECK(nl.beta(0.3, 5.0, 2.0) == 0.0);
  CHECK(nl.affine);
  CHECK(monotonicity_bound_holds(nl.metadata, unit_poincare_constant()));
  const AssumptionReport rep = check_assumptions(nl, 20000, 7);
  CHECK(rep.pass);
  CHECK(rep.lipschitz_alpha_margin >= 0.0);
  CHECK(rep.lipschitz_beta_margin >= 0.0);
  CHECK(rep.monotonicity_margin >= -1e-12);
}

TEST_CASE("advection-diffusion-reaction") {
  const Nonlinearity plain = builtin_adr(1.0, 0.0, 0.0);
  const Nonlinearity heat = builtin_heat();
  for (double x : {0.1, 0.6}) {
    for (double y : {-2.0, 0.5}) {
      for (double z : {-1.0, 3.0}) {
        CHECK(plain.alpha(x, y, z) == heat.alpha(x, y, z));
        CHECK(plain.beta(x, y, z) == heat.beta(x, y, z));
      }
    }
  }
  const Nonlinearity accepted = builtin_adr(1.0, 0.1, 0.1);
  CHECK(accepted.metadata.h2 == Approx(0.995));
  CHECK(accepted.alpha(0.2, 1.0, 2.0) == Approx(2.0));
  CHECK(accepted.beta(0.2, 1.0, 2.0) == Approx(0.1 * 2.0 + 0.1 * 1.0));
  CHECK(check_assumptions(accepted, 100000, 3).pass);
  CHECK(kind_of([] { builtin_adr(0.01, 1.0, 0.0); }) == ErrorKind::AssumptionViolated);
}

TEST_CASE("quasilinear example") {
  const Nonlinearity g0 = builtin_quasilinear(0.0);
  CHECK(g0.alpha(0.4, 2.0, 1.0) == 1.0);
  CHECK(g0.beta(0.4, 1.0, 0.0) == Approx(std::atan(1.0)));
  const Nonlinearity g5 = builtin_quasilinear(0.5);
  CHECK(g5.alpha(0.4, 0.0, std::numbers::pi) == Approx(std::numbers::pi));
  CHECK(g5.alpha(0.4, 0.0, -1.0) == Approx(-1.0 + 0.5 * std::sin(1.0)));
  CHECK_FALSE(g5.affine);
  CHECK(g5.principal.has_value());
  CHECK(check_assumptions(g5, 10000, 11).pass);
  CHECK(check_assumptions(builtin_quasilinear(0.25), 100000, 5).pass);
  CHECK(kind_of([] { builtin_quasilinear(2.0); }) == ErrorKind::AssumptionViolated);
}

TEST_CASE("sampled check rejects a cubic flux") {
  Nonlinearity cubic = builtin_heat();
  cubic.name = "cubic";
  cubic.alpha = [](double, double, double z) { return z * z * z; };
  cubic.affine = false;
  const AssumptionReport rep = check_assumptions(cubic, 10000, 1);
  CHECK_FALSE(rep.pass);
  CHECK(rep.lipschitz_alpha_margin < 0.0);
}

TEST_CASE("sampled check is reproducible and validates its input") {
  const Nonlinearity nl = builtin_quasilinear(0.25);
  const AssumptionReport a = check_assumptions(nl, 5000, 99);
  const AssumptionReport b = check_assumptions(nl, 5000, 99);
  CHECK(a.monotonicity_margin == b.monotonicity_margin);
  CHECK(a.samples == 5000);
  CHECK(kind_of([&] { check_assumptions(nl, 0, 1); }) == ErrorKind::InvalidParameter);
}
