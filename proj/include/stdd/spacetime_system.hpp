#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "stdd/nonlinearity.hpp"
#include "stdd/quadrature.hpp"
#include "stdd/spatial_fem.hpp"
#include "stdd/temporal_spectral.hpp"

namespace stdd {

// Space-time coefficient vectors use the tensor layout index = a * ns + k,
// a = temporal basis index, k = local spatial dof of the region.  This is the
// layout of Eigen's kroneckerProduct(temporal, spatial).

/// Primal space-time field (element of W_i^h or W^h).
struct SpaceTimeField {
  Region region = Region::Whole;
  int temporal_dim = 0;
  int spatial_dim = 0;
  Eigen::VectorXd coeffs;

  static SpaceTimeField zero(Region region, int temporal_dim, int spatial_dim);
  double at(int a, int k) const { return coeffs[static_cast<Eigen::Index>(a) * spatial_dim + k]; }
};

/// Dual space-time vector: entries are functionals applied to basis functions.
struct SpaceTimeDual {
  Eigen::VectorXd values;
};

/// Primal interface trace (element of Z^h = U_N^tau since Gamma is one node).
struct InterfaceTrace {
  Eigen::VectorXd coeffs;
};

/// Dual interface vector (element of (Z^h)*).
struct InterfaceDual {
  Eigen::VectorXd values;
};

/// Quadrature used wherever a time integral cannot be done in frequency space.
struct QuadratureSpec {
  double window = 50.0;       // T_q
  int time_points = 4;        // Gauss points per time panel
  double panel_length = 0.0;  // 0 selects min(tau/4, pi/(2 N tau))
  int space_points = 3;       // Gauss points per element
  double tail_budget = 5e-3;  // allowed squared L^2 tail of the slowest basis function

  double effective_panel(const TemporalBasis& basis) const;
  QuadratureRule time_rule(const TemporalBasis& basis, double a, double b) const;
};

/// L^2 tail int_{|t|>T} |v|^2 of the slowest-decaying basis functions
/// (psi~_0 ~ 1/(pi t)): 2 / (pi^2 T).
double basis_tail_bound(double window);

/// Throws window-too-small when basis_tail_bound exceeds the budget.
void check_window(const QuadratureSpec& spec);

/// Free dofs of a region split into interior and interface space-time sets.
struct RegionLayout {
  Region region;
  int temporal_dim;
  int spatial_dim;
  int interface_local;             // -1 for Whole
  std::vector<int> interior;       // space-time indices with k != interface
  std::vector<int> interface;      // a * ns + interface_local, a = 0..dim-1

  RegionLayout(const TemporalBasis& basis, const SpatialMesh& mesh, Region region);
  int size() const { return temporal_dim * spatial_dim; }
};

SparseMatrix extract(const SparseMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols);

/// Linear space-time operator of a region, Galerkin system matrix with
/// row = test function.  For the heat equation the bilinear-form matrix
/// (row = trial) is D+- (x) M_i + T (x) K_i, i.e. system^T.
struct SpaceTimeOperator {
  Region region;
  int temporal_dim;
  int spatial_dim;
  SparseMatrix system;

  SpaceTimeDual apply(const SpaceTimeField& u) const;
};

SpaceTimeOperator assemble_linear(Region region, const Nonlinearity& nl, const TemporalBasis& basis,
                                  const SpatialMesh& mesh);

/// SPD matrix D++ (x) M_i + T (x) K_i of the region (the W_i inner product
/// used to precondition subdomain iterations).
SparseMatrix inner_product_matrix(Region region, const TemporalBasis& basis, const SpatialMesh& mesh);

/// Basis values on a time rule symmetric about t = 0, stored for the
/// positive half only: the cosine family is even and the sine family odd, so
/// the mirrored nodes follow by a sign flip.  Shareable between regions.
struct TimeSampling {
  QuadratureRule half_rule;  // nodes in (0, T_q]
  Eigen::MatrixXd even;      // even(q, j) = psi_j(t_q)
  Eigen::MatrixXd odd;       // odd(q, j) = psi~_j(t_q)

  TimeSampling(const TemporalBasis& basis, QuadratureRule half_rule);
};

/// Evaluates r_k = a_i(u, v_k) for all space-time test functions of a region.
/// The affine principal part of the nonlinearity and the time-derivative term
/// are applied exactly through the Grams; the remainder alpha - a z,
/// beta - (b z + c y) is integrated with tensor Gauss quadrature over
/// [-T_q, T_q] x region.  With split_principal = false everything except the
/// time derivative goes through quadrature.
class RegionResidual {
 public:
  RegionResidual(Region region, const Nonlinearity& nl, const TemporalBasis& basis, const SpatialMesh& mesh,
                 const QuadratureSpec& quad, bool split_principal = true,
                 std::shared_ptr<const TimeSampling> sampling = nullptr);

  SpaceTimeDual operator()(const SpaceTimeField& u) const;

  Region region() const { return region_; }
  const SparseMatrix& linear_part() const { return linear_; }
  bool has_remainder() const { return has_remainder_; }

 private:
  struct SpacePoint {
    double x;
    double weight;
    int element;
    int dof0, dof1;  // local dofs of the element ends, -1 if none
    double phi0, phi1;
    double a, b, c;  // principal coefficients at x (zero when not split)
  };

  Region region_;
  int temporal_dim_;
  int spatial_dim_;
  double h_;
  SparseMatrix linear_;
  bool has_remainder_;
  std::function<double(double, double, double)> alpha_;
  std::function<double(double, double, double)> beta_;
  std::shared_ptr<const TimeSampling> sampling_;
  std::vector<SpacePoint> points_;
};

std::shared_ptr<const TimeSampling> residual_sampling(const TemporalBasis& basis, const QuadratureSpec& quad);

/// r = a_i(u, .) - (f, .) over the region's test functions.
SpaceTimeDual residual_quasilinear(Region region, const Nonlinearity& nl, const TemporalBasis& basis,
                                   const SpatialMesh& mesh, const SpaceTimeField& u, const SourceTerm& f,
                                   const QuadratureSpec& quad);

/// (f, v_k) over the region's space-time test functions.
SpaceTimeDual load_vector(Region region, const SourceTerm& f, const TemporalBasis& basis, const SpatialMesh& mesh,
                          const QuadratureSpec& quad);

/// Linear map Z^h -> (Z^h)* stored densely (row = test).
struct InterfaceOperator {
  Eigen::MatrixXd matrix;

  InterfaceDual apply(const InterfaceTrace& eta) const { return {matrix * eta.coeffs}; }
};

/// Dense Schur complement A_GG - A_GI A_II^{-1} A_IG.  `spd` selects a
/// Cholesky factorization of A_II (else sparse LU).
Eigen::MatrixXd schur_complement(const SparseMatrix& a, const std::vector<int>& interior,
                                 const std::vector<int>& interface, bool spd);

/// P1: Schur complement onto Gamma of D++ (x) M_2 + T (x) K_2.
InterfaceOperator p1_matrix(const TemporalBasis& basis, const SpatialMesh& mesh);

/// P2: QuarterQuarter Gram + (elliptic Schur complement of K_2) * Mass Gram.
InterfaceOperator p2_matrix(const TemporalBasis& basis, const SpatialMesh& mesh);

/// J: Riesz map of L^2(Gamma x R), the temporal Mass Gram.
InterfaceOperator interface_riesz(const TemporalBasis& basis);

/// Rotated identity H^phi = cos(phi) I - sin(phi) H acting on temporal
/// coefficients; the adjoint acts on dual vectors by the transpose.
class RotatedIdentity {
 public:
  RotatedIdentity(const TemporalBasis& basis, double phi);

  double phi() const { return phi_; }
  Eigen::MatrixXd matrix() const;

  InterfaceTrace apply(const InterfaceTrace& eta) const;
  InterfaceDual adjoint_apply(const InterfaceDual& r) const;
  /// Adjoint of H^phi (x) I on a space-time dual vector with ns spatial dofs.
  Eigen::VectorXd adjoint_apply_spacetime(const Eigen::VectorXd& r, int spatial_dim) const;

 private:
  double phi_;
  SparseMatrix hilbert_;
};

RotatedIdentity hphi(const TemporalBasis& basis, double phi);

}  // namespace stdd
