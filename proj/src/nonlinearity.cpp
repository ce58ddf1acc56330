#include "stdd/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "stdd/error.hpp"

namespace stdd {

double poincare_constant(double length) {
  const double r = length / std::numbers::pi;
  return r * r;
}

double poincare_constant(const SpatialMesh& mesh) {
  return std::max({poincare_constant(mesh.region_length(Region::Whole)),
                   poincare_constant(mesh.region_length(Region::Sub1)),
                   poincare_constant(mesh.region_length(Region::Sub2))});
}

double unit_poincare_constant() { return poincare_constant(1.0); }

bool monotonicity_bound_holds(const NonlinearityMetadata& meta, double poincare) {
  return meta.h2 > poincare * meta.h3;
}

Nonlinearity builtin_heat() {
  Nonlinearity nl;
  nl.name = "heat";
  nl.alpha = [](double, double, double z) { return z; };
  nl.beta = [](double, double, double) { return 0.0; };
  nl.metadata = {1.0, 1.0, 0.0};
  nl.principal = AffineCoefficients{[](double) { return 1.0; }, nullptr, nullptr};
  nl.affine = true;
  return nl;
}

Nonlinearity builtin_adr(std::function<double(double)> a, std::function<double(double)> b,
                         std::function<double(double)> c, double poincare) {
  // Sampled inf/sup of the coefficient fields.
  constexpr int kSamples = 1001;
  double inf_h2 = std::numeric_limits<double>::infinity();
  double sup_h3 = 0.0;
  double sup_lip = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = static_cast<double>(i) / (kSamples - 1);
    const double av = a(x);
    const double bv = b(x);
    const double cv = c(x);
    inf_h2 = std::min(inf_h2, av - 0.5 * bv * bv);
    // Young's inequality on the cross term b dz dy with weight b^2/2 on dz^2
    // leaves dy^2/2 to be absorbed: h3 = 1/2 - c when b != 0.
    const double h3 = bv != 0.0 ? 0.5 - cv : -cv;
    sup_h3 = std::max(sup_h3, h3);
    sup_lip = std::max({sup_lip, std::abs(av), std::abs(bv), std::abs(cv)});
  }
  Nonlinearity nl;
  nl.name = "adr";
  nl.metadata = {std::max(sup_lip, 1e-300), inf_h2, sup_h3};
  if (!monotonicity_bound_holds(nl.metadata, poincare)) {
    throw Error(ErrorKind::AssumptionViolated,
                "advection-diffusion-reaction coefficients violate inf h2 > C_p sup h3 (h2 = " +
                    std::to_string(inf_h2) + ", h3 = " + std::to_string(sup_h3) + ")");
  }
  nl.alpha = [a](double x, double, double z) { return a(x) * z; };
  nl.beta = [b, c](double x, double y, double z) { return b(x) * z + c(x) * y; };
  nl.principal = AffineCoefficients{a, b, c};
  nl.affine = true;
  return nl;
}

Nonlinearity builtin_adr(double a, double b, double c, double poincare) {
  return builtin_adr([a](double) { return a; }, [b](double) { return b; }, [c](double) { return c; }, poincare);
}

Nonlinearity builtin_quasilinear(double gamma, double poincare) {
  Nonlinearity nl;
  nl.name = "quasilinear";
  nl.metadata = {1.0 + std::abs(gamma), 1.0 - gamma, 1.0};
  if (!monotonicity_bound_holds(nl.metadata, poincare)) {
    throw Error(ErrorKind::AssumptionViolated,
                "quasilinear example needs 1 - gamma > C_p, got gamma = " + std::to_string(gamma));
  }
  nl.alpha = [gamma](double, double, double z) { return z + gamma * std::sin(std::abs(z)); };
  nl.beta = [](double, double y, double) { return std::atan(y); };
  // arctan'(0) = 1: the linear reaction y is assembled exactly.
  nl.principal = AffineCoefficients{[](double) { return 1.0; }, nullptr, [](double) { return 1.0; }};
  nl.affine = false;
  return nl;
}

AssumptionReport check_assumptions(const Nonlinearity& nl, std::size_t samples, std::uint64_t seed,
                                   double poincare) {
  if (samples == 0) throw Error(ErrorKind::InvalidParameter, "check_assumptions needs samples >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> wide(-10.0, 10.0);
  std::uniform_real_distribution<double> near(-1e-3, 1e-3);

  const auto& m = nl.metadata;
  AssumptionReport rep;
  rep.samples = samples;
  rep.poincare = poincare;
  rep.bound_margin = m.h2 - poincare * m.h3;
  rep.lipschitz_alpha_margin = std::numeric_limits<double>::infinity();
  rep.lipschitz_beta_margin = std::numeric_limits<double>::infinity();
  rep.monotonicity_margin = std::numeric_limits<double>::infinity();

  bool ok = true;
  for (std::size_t s = 0; s < samples; ++s) {
    const double x = unit(rng);
    const double y = wide(rng);
    const double z = wide(rng);
    // Every other sample is a close pair, probing local slopes.
    const bool close = (s % 2) == 1;
    const double y2 = close ? y + near(rng) : wide(rng);
    const double z2 = close ? z + near(rng) : wide(rng);
    const double dy = y - y2;
    const double dz = z - z2;

    const double a1 = nl.alpha(x, y, z);
    const double a2 = nl.alpha(x, y2, z2);
    const double b1 = nl.beta(x, y, z);
    const double b2 = nl.beta(x, y2, z2);

    const double lip_bound = m.h1 * (std::abs(dz) + std::abs(dy));
    const double lip_a = lip_bound - std::abs(a1 - a2);
    const double lip_b = lip_bound - std::abs(b1 - b2);
    const double lhs = (a1 - a2) * dz + (b1 - b2) * dy;
    const double rhs = m.h2 * dz * dz - m.h3 * dy * dy;
    const double mono = lhs - rhs;

    // Rounding slack relative to the magnitudes involved.
    const double slack_lip = 1e-12 * (lip_bound + std::abs(a1) + std::abs(a2) + std::abs(b1) + std::abs(b2));
    const double slack_mono = 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0) * (1.0 + std::abs(dz) + std::abs(dy));
    ok = ok && lip_a >= -slack_lip && lip_b >= -slack_lip && mono >= -slack_mono;

    rep.lipschitz_alpha_margin = std::min(rep.lipschitz_alpha_margin, lip_a);
    rep.lipschitz_beta_margin = std::min(rep.lipschitz_beta_margin, lip_b);
    rep.monotonicity_margin = std::min(rep.monotonicity_margin, mono);
  }
  rep.pass = ok && rep.bound_margin > 0.0;
  return rep;
}

}  // namespace stdd
