#include "stdd/spacetime_system.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/KroneckerProduct>

#include "stdd/error.hpp"

namespace stdd {

SpaceTimeField SpaceTimeField::zero(Region region, int temporal_dim, int spatial_dim) {
  return {region, temporal_dim, spatial_dim,
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(temporal_dim) * spatial_dim)};
}

double QuadratureSpec::effective_panel(const TemporalBasis& basis) const {
  if (panel_length > 0.0) return panel_length;
  const double top = basis.bands() * basis.tau();
  return std::min(0.25 * basis.tau(), std::numbers::pi / (2.0 * top));
}

QuadratureRule QuadratureSpec::time_rule(const TemporalBasis& basis, double a, double b) const {
  const double len = effective_panel(basis);
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / len - 1e-9)));
  return composite_gauss(a, b, panels, time_points);
}

double basis_tail_bound(double window) {
  return 2.0 / (std::numbers::pi * std::numbers::pi * window);
}

void check_window(const QuadratureSpec& spec) {
  if (!(spec.window > 0.0)) throw Error(ErrorKind::InvalidParameter, "quadrature window must be positive");
  const double tail = basis_tail_bound(spec.window);
  if (tail > spec.tail_budget) {
    throw Error(ErrorKind::WindowTooSmall, "basis tail bound " + std::to_string(tail) + " at T_q = " +
                                               std::to_string(spec.window) + " exceeds budget " +
                                               std::to_string(spec.tail_budget));
  }
}

RegionLayout::RegionLayout(const TemporalBasis& basis, const SpatialMesh& mesh, Region r)
    : region(r),
      temporal_dim(basis.dim()),
      spatial_dim(static_cast<int>(mesh.region_nodes(r).size())),
      interface_local(mesh.interface_local(r)) {
  for (int a = 0; a < temporal_dim; ++a) {
    for (int k = 0; k < spatial_dim; ++k) {
      const int idx = a * spatial_dim + k;
      if (k == interface_local) {
        interface.push_back(idx);
      } else {
        interior.push_back(idx);
      }
    }
  }
}

SparseMatrix extract(const SparseMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> row_map(static_cast<std::size_t>(m.rows()), -1);
  std::vector<int> col_map(static_cast<std::size_t>(m.cols()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    const int cj = col_map[c];
    if (cj < 0) continue;
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      const int ri = row_map[it.row()];
      if (ri >= 0) triplets.emplace_back(ri, cj, it.value());
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SpaceTimeDual SpaceTimeOperator::apply(const SpaceTimeField& u) const { return {system * u.coeffs}; }

namespace {

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b).eval();
  out.makeCompressed();
  return out;
}

SparseMatrix time_derivative_part(const TemporalBasis& basis, const SparseMatrix& spatial_mass) {
  // Row = test: a(phi_l, phi_k) = G(l, k), so the temporal factor is G^T.
  const SparseMatrix d = gram(basis, GramKind::HalfPlusMinus).matrix.transpose();
  return kron(d, spatial_mass);
}

}  // namespace

SpaceTimeOperator assemble_linear(Region region, const Nonlinearity& nl, const TemporalBasis& basis,
                                  const SpatialMesh& mesh) {
  if (!nl.affine || !nl.principal) {
    throw Error(ErrorKind::NotLinear, "nonlinearity '" + nl.name + "' is not affine");
  }
  const SpatialMatrices sm = assemble_spatial(mesh, region);
  const SparseMatrix spatial = assemble_affine(mesh, region, *nl.principal);
  const SparseMatrix t_mass = gram(basis, GramKind::Mass).matrix;
  SparseMatrix system = time_derivative_part(basis, sm.mass) + kron(t_mass, spatial);
  system.makeCompressed();
  return {region, basis.dim(), static_cast<int>(sm.nodes.size()), std::move(system)};
}

SparseMatrix inner_product_matrix(Region region, const TemporalBasis& basis, const SpatialMesh& mesh) {
  const SpatialMatrices sm = assemble_spatial(mesh, region);
  SparseMatrix g = kron(gram(basis, GramKind::HalfPlusPlus).matrix, sm.mass) +
                   kron(gram(basis, GramKind::Mass).matrix, sm.stiffness);
  g.makeCompressed();
  return g;
}

TimeSampling::TimeSampling(const TemporalBasis& basis, QuadratureRule r) : half_rule(std::move(r)) {
  const Eigen::MatrixXd psi = basis.time_eval_matrix(half_rule.nodes);
  const int n1 = basis.bands() + 1;
  even = psi.leftCols(n1);
  odd = psi.rightCols(n1);
}

std::shared_ptr<const TimeSampling> residual_sampling(const TemporalBasis& basis, const QuadratureSpec& quad) {
  check_window(quad);
  return std::make_shared<const TimeSampling>(basis, quad.time_rule(basis, 0.0, quad.window));
}

RegionResidual::RegionResidual(Region region, const Nonlinearity& nl, const TemporalBasis& basis,
                               const SpatialMesh& mesh, const QuadratureSpec& quad, bool split_principal,
                               std::shared_ptr<const TimeSampling> sampling)
    : region_(region), temporal_dim_(basis.dim()), h_(mesh.h()) {
  const SpatialMatrices sm = assemble_spatial(mesh, region);
  spatial_dim_ = static_cast<int>(sm.nodes.size());
  linear_ = time_derivative_part(basis, sm.mass);
  const bool split = split_principal && nl.principal.has_value();
  if (split) {
    linear_ += kron(gram(basis, GramKind::Mass).matrix, assemble_affine(mesh, region, *nl.principal));
  }
  linear_.makeCompressed();
  has_remainder_ = !(split && nl.affine);
  if (!has_remainder_) return;

  alpha_ = nl.alpha;
  beta_ = nl.beta;
  sampling_ = sampling ? std::move(sampling) : residual_sampling(basis, quad);

  const QuadratureRule ref = gauss_legendre(quad.space_points);
  const auto [first, last] = mesh.region_elements(region);
  const int first_node = sm.nodes.front();
  auto local = [&](int node) {
    if (mesh.kind(node) == NodeKind::Boundary) return -1;
    const int k = node - first_node;
    return (k >= 0 && k < spatial_dim_) ? k : -1;
  };
  for (int e = first; e < last; ++e) {
    for (std::size_t q = 0; q < ref.size(); ++q) {
      const double xi = 0.5 * (ref.nodes[q] + 1.0);
      SpacePoint p{};
      p.x = mesh.node(e) + xi * h_;
      p.weight = 0.5 * ref.weights[q] * h_;
      p.element = e;
      p.dof0 = local(e);
      p.dof1 = local(e + 1);
      p.phi0 = 1.0 - xi;
      p.phi1 = xi;
      if (split) {
        const auto& pc = *nl.principal;
        p.a = pc.a ? pc.a(p.x) : 0.0;
        p.b = pc.b ? pc.b(p.x) : 0.0;
        p.c = pc.c ? pc.c(p.x) : 0.0;
      }
      points_.push_back(p);
    }
  }
}

SpaceTimeDual RegionResidual::operator()(const SpaceTimeField& u) const {
  Eigen::VectorXd out = linear_ * u.coeffs;
  if (!has_remainder_) return {std::move(out)};

  const TimeSampling& ts = *sampling_;
  const auto& wt = ts.half_rule.weights;
  const Eigen::Index nt = ts.even.rows();
  const Eigen::Index n1 = ts.even.cols();
  Eigen::Map<const Eigen::MatrixXd> coeff(u.coeffs.data(), spatial_dim_, temporal_dim_);
  // Nodal values at +t and -t: even part +/- odd part.
  const Eigen::MatrixXd even_part = ts.even * coeff.leftCols(n1).transpose();
  const Eigen::MatrixXd odd_part = ts.odd * coeff.rightCols(n1).transpose();
  Eigen::MatrixXd dual_pos = Eigen::MatrixXd::Zero(nt, spatial_dim_);
  Eigen::MatrixXd dual_neg = Eigen::MatrixXd::Zero(nt, spatial_dim_);
  const double inv_h = 1.0 / h_;

  auto accumulate = [&](const SpacePoint& p, Eigen::Index q, double v0, double v1, Eigen::MatrixXd& dual) {
    const double y = p.phi0 * v0 + p.phi1 * v1;
    const double z = (v1 - v0) * inv_h;
    const double ar = alpha_(p.x, y, z) - p.a * z;
    const double br = beta_(p.x, y, z) - p.b * z - p.c * y;
    if (p.dof0 >= 0) dual(q, p.dof0) += p.weight * (-ar * inv_h + br * p.phi0);
    if (p.dof1 >= 0) dual(q, p.dof1) += p.weight * (ar * inv_h + br * p.phi1);
  };
  for (const SpacePoint& p : points_) {
    for (Eigen::Index q = 0; q < nt; ++q) {
      const double e0 = p.dof0 >= 0 ? even_part(q, p.dof0) : 0.0;
      const double o0 = p.dof0 >= 0 ? odd_part(q, p.dof0) : 0.0;
      const double e1 = p.dof1 >= 0 ? even_part(q, p.dof1) : 0.0;
      const double o1 = p.dof1 >= 0 ? odd_part(q, p.dof1) : 0.0;
      accumulate(p, q, e0 + o0, e1 + o1, dual_pos);
      accumulate(p, q, e0 - o0, e1 - o1, dual_neg);
    }
  }
  for (Eigen::Index q = 0; q < nt; ++q) {
    const double w = wt[static_cast<std::size_t>(q)];
    dual_pos.row(q) *= w;
    dual_neg.row(q) *= w;
  }
  Eigen::MatrixXd projected(spatial_dim_, temporal_dim_);  // ns x dim
  projected.leftCols(n1) = (dual_pos + dual_neg).transpose() * ts.even;
  projected.rightCols(n1) = (dual_pos - dual_neg).transpose() * ts.odd;
  out += Eigen::Map<const Eigen::VectorXd>(projected.data(), projected.size());
  return {std::move(out)};
}

SpaceTimeDual load_vector(Region region, const SourceTerm& f, const TemporalBasis& basis, const SpatialMesh& mesh,
                          const QuadratureSpec& quad) {
  const auto nodes = mesh.region_nodes(region);
  const int ns = static_cast<int>(nodes.size());
  const int dim = basis.dim();
  if (!f.f) return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ns) * dim)};
  check_window(quad);

  const double lo = f.causal ? 0.0 : -quad.window;
  const QuadratureRule trule = quad.time_rule(basis, lo, quad.window);
  const Eigen::MatrixXd psi = basis.time_eval_matrix(trule.nodes);
  const QuadratureRule ref = gauss_legendre(quad.space_points);
  const auto [first, last] = mesh.region_elements(region);
  const double h = mesh.h();
  const int first_node = nodes.front();

  const auto nt = static_cast<Eigen::Index>(trule.size());
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(nt, ns);  // (f(t_q, .), phi_k)
  for (int e = first; e < last; ++e) {
    const std::array<int, 2> ends = {e, e + 1};
    for (std::size_t s = 0; s < ref.size(); ++s) {
      const double xi = 0.5 * (ref.nodes[s] + 1.0);
      const double x = mesh.node(e) + xi * h;
      const double w = 0.5 * ref.weights[s] * h;
      const std::array<double, 2> phi = {1.0 - xi, xi};
      for (int end = 0; end < 2; ++end) {
        const int node = ends[end];
        const int k = node - first_node;
        if (mesh.kind(node) == NodeKind::Boundary || k < 0 || k >= ns) continue;
        for (Eigen::Index q = 0; q < nt; ++q) {
          proj(q, k) += w * phi[end] * f.f(trule.nodes[static_cast<std::size_t>(q)], x);
        }
      }
    }
  }
  for (Eigen::Index q = 0; q < nt; ++q) proj.row(q) *= trule.weights[static_cast<std::size_t>(q)];
  const Eigen::MatrixXd out = proj.transpose() * psi;  // ns x dim
  return {Eigen::Map<const Eigen::VectorXd>(out.data(), out.size())};
}

SpaceTimeDual residual_quasilinear(Region region, const Nonlinearity& nl, const TemporalBasis& basis,
                                   const SpatialMesh& mesh, const SpaceTimeField& u, const SourceTerm& f,
                                   const QuadratureSpec& quad) {
  check_window(quad);
  const RegionResidual residual(region, nl, basis, mesh, quad);
  SpaceTimeDual r = residual(u);
  r.values -= load_vector(region, f, basis, mesh, quad).values;
  return r;
}

Eigen::MatrixXd schur_complement(const SparseMatrix& a, const std::vector<int>& interior,
                                 const std::vector<int>& interface, bool spd) {
  const SparseMatrix a_gg = extract(a, interface, interface);
  Eigen::MatrixXd s = Eigen::MatrixXd(a_gg);
  if (interior.empty()) return s;
  const SparseMatrix a_ii = extract(a, interior, interior);
  const SparseMatrix a_ig = extract(a, interior, interface);
  const SparseMatrix a_gi = extract(a, interface, interior);

  auto eliminate = [&](auto& solver) {
    constexpr Eigen::Index kBlock = 64;
    const Eigen::Index m = a_ig.cols();
    for (Eigen::Index c0 = 0; c0 < m; c0 += kBlock) {
      const Eigen::Index nc = std::min(kBlock, m - c0);
      const Eigen::MatrixXd rhs = Eigen::MatrixXd(a_ig.middleCols(c0, nc));
      const Eigen::MatrixXd x = solver.solve(rhs);
      s.middleCols(c0, nc) -= a_gi * x;
    }
  };
  if (spd) {
    Eigen::SimplicialLDLT<SparseMatrix> solver(a_ii);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::SingularSystem, "interior block is not symmetric positive definite");
    }
    eliminate(solver);
  } else {
    Eigen::SparseLU<SparseMatrix> solver;
    solver.analyzePattern(a_ii);
    solver.factorize(a_ii);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::SingularSystem, "interior block factorization failed");
    }
    eliminate(solver);
  }
  return s;
}

InterfaceOperator p1_matrix(const TemporalBasis& basis, const SpatialMesh& mesh) {
  const RegionLayout layout(basis, mesh, Region::Sub2);
  const SparseMatrix g2 = inner_product_matrix(Region::Sub2, basis, mesh);
  Eigen::MatrixXd p = schur_complement(g2, layout.interior, layout.interface, true);
  return {0.5 * (p + p.transpose())};
}

InterfaceOperator p2_matrix(const TemporalBasis& basis, const SpatialMesh& mesh) {
  const SpatialMatrices sm = assemble_spatial(mesh, Region::Sub2);
  std::vector<int> interior;
  for (int k = 0; k < static_cast<int>(sm.nodes.size()); ++k) {
    if (k != sm.interface_index) interior.push_back(k);
  }
  const double elliptic = schur_complement(sm.stiffness, interior, {sm.interface_index}, true)(0, 0);
  const Eigen::MatrixXd quarter = Eigen::MatrixXd(gram(basis, GramKind::QuarterQuarter).matrix);
  const Eigen::MatrixXd mass = Eigen::MatrixXd(gram(basis, GramKind::Mass).matrix);
  return {quarter + elliptic * mass};
}

InterfaceOperator interface_riesz(const TemporalBasis& basis) {
  return {Eigen::MatrixXd(gram(basis, GramKind::Mass).matrix)};
}

RotatedIdentity::RotatedIdentity(const TemporalBasis& basis, double phi) : phi_(phi), hilbert_(hilbert_matrix(basis)) {
  if (!std::isfinite(phi)) throw Error(ErrorKind::InvalidParameter, "rotation angle must be finite");
}

RotatedIdentity hphi(const TemporalBasis& basis, double phi) { return RotatedIdentity(basis, phi); }

Eigen::MatrixXd RotatedIdentity::matrix() const {
  const Eigen::Index n = hilbert_.rows();
  return std::cos(phi_) * Eigen::MatrixXd::Identity(n, n) - std::sin(phi_) * Eigen::MatrixXd(hilbert_);
}

InterfaceTrace RotatedIdentity::apply(const InterfaceTrace& eta) const {
  return {std::cos(phi_) * eta.coeffs - std::sin(phi_) * (hilbert_ * eta.coeffs)};
}

InterfaceDual RotatedIdentity::adjoint_apply(const InterfaceDual& r) const {
  return {std::cos(phi_) * r.values - std::sin(phi_) * (hilbert_.transpose() * r.values)};
}

Eigen::VectorXd RotatedIdentity::adjoint_apply_spacetime(const Eigen::VectorXd& r, int spatial_dim) const {
  const auto dim = hilbert_.rows();
  Eigen::Map<const Eigen::MatrixXd> rm(r.data(), spatial_dim, dim);
  // (A^T (x) I) vec(R) = vec(R A) for the a * ns + k layout.
  const Eigen::MatrixXd rotated = std::cos(phi_) * rm - std::sin(phi_) * (rm * hilbert_);
  return Eigen::Map<const Eigen::VectorXd>(rotated.data(), rotated.size());
}

}  // namespace stdd
