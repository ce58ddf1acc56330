#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <span>

namespace stdd {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Spectral temporal basis on the whole real line.
///
/// The space holds 2(N+1) real functions whose Fourier transforms are
/// piecewise linear on the frequency grid w_j = j*tau, j = -N..N, and vanish
/// outside [-N tau, N tau].  Index layout, used by every matrix in the library:
///
///   0 .. N         cosine family psi_j   (even, real transform)
///   N+1 .. 2N+1    sine family psi~_j    (odd, transform -i sgn(w) F psi_j)
///
/// Fourier convention: F v(w) = int v(t) exp(-i w t) dt, inverse carries 1/(2 pi).
class TemporalBasis {
 public:
  TemporalBasis(int bands, double tau);

  int bands() const { return bands_; }
  double tau() const { return tau_; }
  int dim() const { return 2 * (bands_ + 1); }

  int cos_index(int j) const { return j; }
  int sin_index(int j) const { return bands_ + 1 + j; }
  bool is_sine(int idx) const { return idx > bands_; }
  int band_of(int idx) const { return is_sine(idx) ? idx - bands_ - 1 : idx; }

  /// Fourier transform of basis function `idx` at frequency `omega`.
  std::complex<double> fourier_eval(int idx, double omega) const;

  /// Time-domain value of basis function `idx` at time `t` (closed form).
  double time_eval(int idx, double t) const;

  /// All basis functions at time `t`, in index layout order.
  Eigen::VectorXd time_eval_all(double t) const;

  /// Row q holds time_eval_all(times[q]).
  Eigen::MatrixXd time_eval_matrix(std::span<const double> times) const;

 private:
  void check_index(int idx) const;

  int bands_;
  double tau_;
};

TemporalBasis new_basis(int bands, double tau);

enum class GramKind { Mass, HalfPlusMinus, HalfPlusPlus, QuarterQuarter };

const char* to_string(GramKind kind);

/// Gram matrix G(k, l) = form(phi_k, phi_l) of one of the temporal forms
///   Mass            (u, v)
///   HalfPlusMinus   (d+^{1/2} u, d-^{1/2} v)
///   HalfPlusPlus    (d+^{1/2} u, d+^{1/2} v)
///   QuarterQuarter  (d^{1/4} u, d^{1/4} v)
/// all evaluated exactly through Parseval, (u, v) = (1/2pi) int Fu conj(Fv).
struct TemporalGram {
  GramKind kind;
  SparseMatrix matrix;
};

TemporalGram gram(const TemporalBasis& basis, GramKind kind);

/// Coefficient matrix of the Hilbert transform on the basis span:
/// psi_j -> psi~_j and psi~_j -> -psi_j.
SparseMatrix hilbert_matrix(const TemporalBasis& basis);

}  // namespace stdd
