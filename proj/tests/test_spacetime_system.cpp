#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "stdd/error.hpp"
#include "stdd/spacetime_system.hpp"

using namespace stdd;
using doctest::Approx;
constexpr double kPi = std::numbers::pi;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

Eigen::MatrixXd gram_dense(const TemporalBasis& b, GramKind k) { return dense(gram(b, k).matrix); }

SpaceTimeField random_field(Region region, int td, int sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SpaceTimeField f = SpaceTimeField::zero(region, td, sd);
  for (Eigen::Index i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] = u(rng);
  return f;
}

// Temporal indices whose time functions decay like 1/t^2.
std::vector<int> fast_decaying(const TemporalBasis& b) {
  std::vector<int> out;
  for (int j = 0; j < b.bands(); ++j) out.push_back(b.cos_index(j));
  for (int j = 1; j < b.bands(); ++j) out.push_back(b.sin_index(j));
  return out;
}

// Reference the temporal bump used by the load-vector test.
double bump(double t) {
  const double s = t - 1.0;
  return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
}

}  // namespace

TEST_CASE("single-dof hand assembly") {
  const TemporalBasis b(1, 0.5);
  const SpatialMesh mesh = build_mesh(2, 0.5);
  const SpaceTimeOperator op = assemble_linear(Region::Whole, builtin_heat(), b, mesh);
  CHECK(op.temporal_dim == 4);
  CHECK(op.spatial_dim == 1);
  const Eigen::MatrixXd expected =
      gram_dense(b, GramKind::HalfPlusMinus).transpose() / 3.0 + 4.0 * gram_dense(b, GramKind::Mass);
  CHECK((dense(op.system) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("heat operator structure") {
  const TemporalBasis b(4, 0.5);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  for (Region r : {Region::Whole, Region::Sub1, Region::Sub2}) {
    const SpaceTimeOperator op = assemble_linear(r, builtin_heat(), b, mesh);
    const SpatialMatrices sm = assemble_spatial(mesh, r);
    const Eigen::MatrixXd a = dense(op.system);
    const Eigen::MatrixXd tk = Eigen::kroneckerProduct(gram_dense(b, GramKind::Mass), dense(sm.stiffness));
    const Eigen::MatrixXd form =
        Eigen::kroneckerProduct(gram_dense(b, GramKind::HalfPlusMinus), dense(sm.mass)) + tk;
    CHECK((a.transpose() - form).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((0.5 * (a + a.transpose()) - tk).cwiseAbs().maxCoeff() < 1e-14);
    // Layout a * ns + k.
    const SpaceTimeField u = random_field(r, b.dim(), op.spatial_dim, 3);
    CHECK((op.apply(u).values - a * u.coeffs).norm() == 0.0);
  }
  CHECK_THROWS_AS(assemble_linear(Region::Whole, builtin_quasilinear(0.25), b, mesh), Error);
}

TEST_CASE("inner-product matrix") {
  const TemporalBasis b(3, 0.5);
  const SpatialMesh mesh = build_mesh(6, 0.5);
  const SpatialMatrices sm = assemble_spatial(mesh, Region::Sub2);
  const Eigen::MatrixXd g = dense(inner_product_matrix(Region::Sub2, b, mesh));
  const Eigen::MatrixXd ref = Eigen::kroneckerProduct(gram_dense(b, GramKind::HalfPlusPlus), dense(sm.mass)) +
                              Eigen::kroneckerProduct(gram_dense(b, GramKind::Mass), dense(sm.stiffness));
  CHECK((g - ref).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(g).info() == Eigen::Success);
}

TEST_CASE("region layout") {
  const TemporalBasis b(2, 1.0);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  const RegionLayout l1(b, mesh, Region::Sub1);
  CHECK(l1.spatial_dim == 4);
  CHECK(l1.interface_local == 3);
  CHECK(l1.interface.size() == 6);
  CHECK(l1.interface[2] == 2 * 4 + 3);
  CHECK(l1.interior.size() == 18);
  const RegionLayout w(b, mesh, Region::Whole);
  CHECK(w.interface.empty());
  CHECK(static_cast<int>(w.interior.size()) == w.size());
}

TEST_CASE("quadrature residual equals the exact path when the remainder vanishes") {
  const TemporalBasis b(4, 0.5);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  Nonlinearity heat = builtin_heat();
  heat.affine = false;  // force the quadrature branch with a zero remainder
  const RegionResidual res(Region::Sub1, heat, b, mesh, QuadratureSpec{});
  CHECK(res.has_remainder());
  const SpaceTimeOperator op = assemble_linear(Region::Sub1, builtin_heat(), b, mesh);
  const SpaceTimeField u = random_field(Region::Sub1, b.dim(), op.spatial_dim, 5);
  CHECK((res(u).values - op.apply(u).values).norm() < 1e-13 * op.apply(u).values.norm());

  const RegionResidual exact(Region::Sub1, builtin_adr(1.0, 0.2, 0.3), b, mesh, QuadratureSpec{});
  CHECK_FALSE(exact.has_remainder());
}

TEST_CASE("quadrature remainder reproduces an understated principal part") {
  // alpha = 2 z with principal a = 1: the extra z goes through quadrature.
  const TemporalBasis b(4, 0.5);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  Nonlinearity nl = builtin_heat();
  nl.alpha = [](double, double, double z) { return 2.0 * z; };
  nl.beta = [](double, double y, double) { return 0.5 * y; };
  nl.affine = false;
  QuadratureSpec quad;
  quad.window = 2000.0;
  const RegionResidual res(Region::Whole, nl, b, mesh, quad);
  const SpaceTimeOperator ref = assemble_linear(Region::Whole, builtin_adr(2.0, 0.0, 0.5), b, mesh);

  const int ns = ref.spatial_dim;
  SpaceTimeField u = SpaceTimeField::zero(Region::Whole, b.dim(), ns);
  const SpaceTimeField noise = random_field(Region::Whole, b.dim(), ns, 9);
  const auto idx = fast_decaying(b);
  for (int a : idx) u.coeffs.segment(static_cast<Eigen::Index>(a) * ns, ns) = noise.coeffs.segment(static_cast<Eigen::Index>(a) * ns, ns);
  const Eigen::VectorXd got = res(u).values;
  const Eigen::VectorXd want = ref.apply(u).values;
  CHECK((got - want).norm() < 1e-6 * want.norm());
}

TEST_CASE("full-quadrature mode agrees with the linear path on fast-decaying fields") {
  const TemporalBasis b(4, 0.5);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  QuadratureSpec quad;
  quad.window = 2000.0;
  const RegionResidual full(Region::Sub2, builtin_adr(1.0, 0.0, 0.5), b, mesh, quad, false);
  CHECK(full.has_remainder());
  const SpaceTimeOperator ref = assemble_linear(Region::Sub2, builtin_adr(1.0, 0.0, 0.5), b, mesh);
  const int ns = ref.spatial_dim;
  SpaceTimeField u = SpaceTimeField::zero(Region::Sub2, b.dim(), ns);
  const SpaceTimeField noise = random_field(Region::Sub2, b.dim(), ns, 13);
  for (int a : fast_decaying(b)) {
    u.coeffs.segment(static_cast<Eigen::Index>(a) * ns, ns) = noise.coeffs.segment(static_cast<Eigen::Index>(a) * ns, ns);
  }
  const Eigen::VectorXd want = ref.apply(u).values;
  CHECK((full(u).values - want).norm() < 1e-6 * want.norm());
}

TEST_CASE("quasilinear residual of the zero field") {
  const TemporalBasis b(6, 0.5);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  const SpaceTimeField zero = SpaceTimeField::zero(Region::Sub1, b.dim(), 4);
  const SpaceTimeDual r = residual_quasilinear(Region::Sub1, builtin_quasilinear(0.25), b, mesh, zero, SourceTerm{},
                                               QuadratureSpec{});
  CHECK(r.values.size() == b.dim() * 4);
  CHECK(r.values.norm() == 0.0);
}

TEST_CASE("quasilinear residual converges under panel refinement") {
  const TemporalBasis b(4, 0.5);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  const Nonlinearity nl = builtin_quasilinear(0.25);
  const SpaceTimeField u = random_field(Region::Sub2, b.dim(), 4, 21);
  // sin|z| has a kink at z = 0, so expect about second order in the panel.
  std::vector<Eigen::VectorXd> r;
  for (double panel : {0.25, 0.125, 0.0625, 0.03125}) {
    QuadratureSpec q;
    q.panel_length = panel;
    r.push_back(RegionResidual(Region::Sub2, nl, b, mesh, q)(u).values);
  }
  for (std::size_t i = 2; i < r.size(); ++i) {
    const double coarse = (r[i - 1] - r[i - 2]).norm();
    const double fine = (r[i] - r[i - 1]).norm();
    CHECK(fine < 0.5 * coarse);
  }
  CHECK((r[3] - r[2]).norm() < 1e-5 * r[3].norm());
  // Space points: 3 versus 5 per element.
  QuadratureSpec q5;
  q5.space_points = 5;
  const Eigen::VectorXd r5 = RegionResidual(Region::Sub2, nl, b, mesh, q5)(u).values;
  const Eigen::VectorXd r3 = RegionResidual(Region::Sub2, nl, b, mesh, QuadratureSpec{})(u).values;
  CHECK((r5 - r3).norm() < 1e-3 * r5.norm());
}

TEST_CASE("load vector against adaptive quadrature") {
  const TemporalBasis b(3, 0.5);
  const SpatialMesh mesh = build_mesh(8, 0.5);
  const SourceTerm f{[](double t, double x) { return bump(t) * std::sin(kPi * x); }, true};
  QuadratureSpec q;
  q.space_points = 5;
  q.time_points = 8;
  q.panel_length = 1.0 / 32.0;
  const SpaceTimeDual load = load_vector(Region::Sub1, f, b, mesh, q);
  const SpaceTimeDual coarse = load_vector(Region::Sub1, f, b, mesh, QuadratureSpec{});
  const auto nodes = mesh.region_nodes(Region::Sub1);
  const int ns = static_cast<int>(nodes.size());
  const double h = mesh.h();
  double worst = 0.0;
  double worst_coarse = 0.0;
  double scale = 0.0;
  for (int a = 0; a < b.dim(); ++a) {
    const double tpart = oracle::integrate([&](double t) { return bump(t) * b.time_eval(a, t); }, 0.0, 2.0);
    for (int k = 0; k < ns; ++k) {
      const double xk = mesh.node(nodes[k]);
      auto hat = [&](double x) { return std::max(0.0, 1.0 - std::abs(x - xk) / h); };
      double xpart = oracle::integrate([&](double x) { return std::sin(kPi * x) * hat(x); }, xk - h, xk);
      if (nodes[k] != mesh.interface_node()) {
        xpart += oracle::integrate([&](double x) { return std::sin(kPi * x) * hat(x); }, xk, xk + h);
      }
      const double want = tpart * xpart;
      worst = std::max(worst, std::abs(load.values[a * ns + k] - want));
      worst_coarse = std::max(worst_coarse, std::abs(coarse.values[a * ns + k] - want));
      scale = std::max(scale, std::abs(want));
    }
  }
  CHECK(worst < 1e-9 * scale);
  CHECK(worst_coarse < 1e-6 * scale);
}

TEST_CASE("P1 equals a dense Schur complement") {
  const TemporalBasis b(3, 0.5);
  const SpatialMesh mesh = build_mesh(4, 0.5);
  const SpatialMatrices sm = assemble_spatial(mesh, Region::Sub2);
  const Eigen::MatrixXd g = Eigen::kroneckerProduct(gram_dense(b, GramKind::HalfPlusPlus), dense(sm.mass)) +
                            Eigen::kroneckerProduct(gram_dense(b, GramKind::Mass), dense(sm.stiffness));
  const int ns = static_cast<int>(sm.nodes.size());
  std::vector<int> gi, ii;
  for (int i = 0; i < g.rows(); ++i) (i % ns == sm.interface_index ? gi : ii).push_back(i);
  const Eigen::MatrixXd s = g(gi, gi) - g(gi, ii) * g(ii, ii).inverse() * g(ii, gi);
  const InterfaceOperator p1 = p1_matrix(b, mesh);
  CHECK((p1.matrix - s).cwiseAbs().maxCoeff() < 1e-12 * s.cwiseAbs().maxCoeff());
  CHECK(Eigen::LLT<Eigen::MatrixXd>(p1.matrix).info() == Eigen::Success);
}

TEST_CASE("P2 combines the quarter Gram with the elliptic Schur complement") {
  const TemporalBasis b(5, 0.5);
  for (int ne : {2, 8, 32}) {
    const SpatialMesh mesh = build_mesh(ne, 0.5);
    const Eigen::MatrixXd want = gram_dense(b, GramKind::QuarterQuarter) + 2.0 * gram_dense(b, GramKind::Mass);
    CHECK((p2_matrix(b, mesh).matrix - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  const SpatialMesh quarter = build_mesh(8, 0.25);
  const Eigen::MatrixXd want =
      gram_dense(b, GramKind::QuarterQuarter) + (1.0 / 0.75) * gram_dense(b, GramKind::Mass);
  CHECK((p2_matrix(b, quarter).matrix - want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((interface_riesz(b).matrix - gram_dense(b, GramKind::Mass)).norm() == 0.0);
}

TEST_CASE("rotated identity") {
  const TemporalBasis b(4, 0.5);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(b.dim(), b.dim());
  CHECK((hphi(b, 0.0).matrix() - id).norm() == 0.0);
  const Eigen::MatrixXd h = dense(hilbert_matrix(b));
  CHECK((hphi(b, kPi / 2).matrix() + h).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::MatrixXd r = hphi(b, 0.3).matrix();
  CHECK((r.transpose() * r - id).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((hphi(b, 0.3).matrix() * hphi(b, 0.4).matrix() - hphi(b, 0.7).matrix()).cwiseAbs().maxCoeff() < 1e-15);

  const Eigen::VectorXd eta = Eigen::VectorXd::LinSpaced(b.dim(), -1.0, 2.0);
  CHECK((hphi(b, 0.3).apply({eta}).coeffs - r * eta).norm() < 1e-15);
  CHECK((hphi(b, 0.3).adjoint_apply({eta}).values - r.transpose() * eta).norm() < 1e-15);

  const int ns = 3;
  const Eigen::VectorXd st = Eigen::VectorXd::LinSpaced(b.dim() * ns, 0.1, 3.0);
  const Eigen::MatrixXd big = Eigen::kroneckerProduct(r, Eigen::MatrixXd::Identity(ns, ns));
  CHECK((hphi(b, 0.3).adjoint_apply_spacetime(st, ns) - big.transpose() * st).norm() < 1e-14);
  CHECK_THROWS_AS(hphi(b, std::nan("")), Error);
}

TEST_CASE("window checks") {
  QuadratureSpec q;
  CHECK_NOTHROW(check_window(q));
  CHECK(basis_tail_bound(50.0) == Approx(2.0 / (kPi * kPi * 50.0)));
  q.window = 10.0;
  try {
    check_window(q);
    FAIL("expected window-too-small");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowTooSmall);
  }
  q.window = -1.0;
  CHECK_THROWS_AS(check_window(q), Error);
  const TemporalBasis b(64, 0.5);
  CHECK(QuadratureSpec{}.effective_panel(b) == Approx(kPi / 64.0));
  CHECK(QuadratureSpec{}.effective_panel(TemporalBasis(2, 0.5)) == Approx(0.125));
}
