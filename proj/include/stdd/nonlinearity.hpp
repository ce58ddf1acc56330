#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "stdd/spatial_fem.hpp"

namespace stdd {

/// Declared structural constants of a coefficient pair (alpha, beta):
/// Lipschitz bound h1, monotonicity pair (h2 lower, h3 upper).
struct NonlinearityMetadata {
  double h1 = 1.0;
  double h2 = 1.0;
  double h3 = 0.0;
};

/// Coefficient functions of the quasilinear operator
///   d_t u - (alpha(x, u, u_x))_x + beta(x, u, u_x)
/// in one space dimension.  Callbacks must be pure.
///
/// `principal` is the affine part that the space-time assembly integrates
/// exactly; only alpha - a z and beta - (b z + c y) go through quadrature.
/// `affine` means the remainder is identically zero.
struct Nonlinearity {
  std::string name;
  std::function<double(double x, double y, double z)> alpha;
  std::function<double(double x, double y, double z)> beta;
  NonlinearityMetadata metadata;
  std::optional<AffineCoefficients> principal;
  bool affine = false;
};

/// Space-time source f(t, x).  `causal` sources vanish for t <= 0.
struct SourceTerm {
  std::function<double(double t, double x)> f;
  bool causal = true;
};

/// Sharp Poincare constant (length/pi)^2 of an interval.
double poincare_constant(double length);
/// Largest constant among Omega, Omega_1, Omega_2.
double poincare_constant(const SpatialMesh& mesh);
/// Unit interval value, 1/pi^2.
double unit_poincare_constant();

/// inf h2 > C_p sup h3
bool monotonicity_bound_holds(const NonlinearityMetadata& meta, double poincare);

Nonlinearity builtin_heat();

/// Linear advection-diffusion-reaction: alpha = a z, beta = b z + c y.
/// Throws assumption-violated when the declared constants fail the bound.
Nonlinearity builtin_adr(std::function<double(double)> a, std::function<double(double)> b,
                         std::function<double(double)> c, double poincare = unit_poincare_constant());
Nonlinearity builtin_adr(double a, double b, double c, double poincare = unit_poincare_constant());

/// alpha = z + gamma sin|z|, beta = arctan(y).
Nonlinearity builtin_quasilinear(double gamma, double poincare = unit_poincare_constant());

struct AssumptionReport {
  std::size_t samples = 0;
  double poincare = 0.0;
  double bound_margin = 0.0;          // inf h2 - C_p sup h3
  double lipschitz_alpha_margin = 0;  // worst h1 (|dz| + |dy|) - |d alpha|
  double lipschitz_beta_margin = 0;
  double monotonicity_margin = 0;     // worst lhs - (h2 dz^2 - h3 dy^2)
  bool pass = false;
};

AssumptionReport check_assumptions(const Nonlinearity& nl, std::size_t samples, std::uint64_t seed,
                                   double poincare = unit_poincare_constant());

}  // namespace stdd
