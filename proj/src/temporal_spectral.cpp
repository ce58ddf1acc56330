#include "stdd/temporal_spectral.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stdd/error.hpp"

namespace stdd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTaylorSwitch = 1e-4;

// (1 - cos x) / x^2
double one_minus_cos_over_sq(double x) {
  if (std::abs(x) < kTaylorSwitch) {
    const double x2 = x * x;
    return 0.5 - x2 / 24.0 + x2 * x2 / 720.0;
  }
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (x * x);
}

// (x - sin x) / x^2
double x_minus_sin_over_sq(double x) {
  const double ax = std::abs(x);
  if (ax < kTaylorSwitch) {
    const double x3 = x * x * x;
    return x / 6.0 - x3 / 120.0;
  }
  if (ax < 1.0) {
    // x - sin x = sum_{k>=1} (-1)^{k+1} x^{2k+1} / (2k+1)!, summed without cancellation.
    double term = x * x * x / 6.0;
    double sum = 0.0;
    for (int k = 1; k < 30 && std::abs(term) > 1e-18 * std::abs(sum); ++k) {
      sum += term;
      term *= -x * x / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum / (x * x);
  }
  return (x - std::sin(x)) / (x * x);
}

// int_0^1 v cos((m + v) x) dv for the truncated top band (m = N - 1).
double top_cos_profile(int bands, double x) {
  const double m = bands - 1;
  if (std::abs(x) < kTaylorSwitch && std::abs(bands * x) < 1e-2) {
    const double a2 = m * m / 2.0 + 2.0 * m / 3.0 + 0.25;
    const double a4 = m * m * m * m / 2.0 + 4.0 * m * m * m / 3.0 + 1.5 * m * m + 0.8 * m + 1.0 / 6.0;
    const double x2 = x * x;
    return 0.5 - 0.5 * x2 * a2 + x2 * x2 * a4 / 24.0;
  }
  // cos(Nx) - cos((N-1)x) = -2 sin((2N-1)x/2) sin(x/2)
  const double n = bands;
  const double diff = -2.0 * std::sin(0.5 * (2.0 * n - 1.0) * x) * std::sin(0.5 * x);
  return (x * std::sin(n * x) + diff) / (x * x);
}

// int_0^1 v sin((m + v) x) dv for the truncated top band.
double top_sin_profile(int bands, double x) {
  const double m = bands - 1;
  if (std::abs(x) < kTaylorSwitch && std::abs(bands * x) < 1e-2) {
    const double b1 = m / 2.0 + 1.0 / 3.0;
    const double b3 = m * m * m / 2.0 + m * m + 0.75 * m + 0.2;
    return x * b1 - x * x * x * b3 / 6.0;
  }
  // sin(Nx) - sin((N-1)x) = 2 cos((2N-1)x/2) sin(x/2)
  const double n = bands;
  const double diff = 2.0 * std::cos(0.5 * (2.0 * n - 1.0) * x) * std::sin(0.5 * x);
  return (-x * std::cos(n * x) + diff) / (x * x);
}

// Nodal P1 function of node j on the half-line grid {0, tau, ..., N tau}.
double half_line_hat(int j, int bands, double tau, double xi) {
  if (xi > bands * tau) return 0.0;
  const double v = 1.0 - std::abs(xi / tau - j);
  return v > 0.0 ? v : 0.0;
}

// Local element integrals int_0^1 w(k + x) p(x) dx for p in
// {(1-x)^2, x(1-x), x^2}; the caller supplies the tau scaling.
using LocalIntegrals = std::array<double, 3>;

LocalIntegrals unit_weight_integrals(int) { return {1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0}; }

LocalIntegrals linear_weight_integrals(int k) {
  return {k / 3.0 + 1.0 / 12.0, k / 6.0 + 1.0 / 12.0, k / 3.0 + 0.25};
}

// Weight sqrt(k + x).  Moments m_n = int_0^1 sqrt(k+x) x^n dx from the
// antiderivatives of y^{p+1/2} for small k, from the binomial series of
// sqrt(k) sqrt(1 + x/k) for k >= 8 where the antiderivative differences
// lose digits.
LocalIntegrals sqrt_weight_integrals(int k) {
  std::array<double, 3> m{};
  if (k == 0) {
    m = {2.0 / 3.0, 2.0 / 5.0, 2.0 / 7.0};
  } else if (k < 8) {
    const double kk = k;
    std::array<double, 3> f{};
    for (int p = 0; p < 3; ++p) {
      const double e = p + 1.5;
      f[p] = (std::pow(kk + 1.0, e) - std::pow(kk, e)) / e;
    }
    m[0] = f[0];
    m[1] = f[1] - kk * f[0];
    m[2] = f[2] - 2.0 * kk * f[1] + kk * kk * f[0];
  } else {
    const double sk = std::sqrt(static_cast<double>(k));
    double coeff = 1.0;  // binom(1/2, n) k^{-n}
    for (int n = 0; n < 60; ++n) {
      for (int p = 0; p < 3; ++p) m[p] += coeff / (n + p + 1.0);
      coeff *= (0.5 - n) / ((n + 1.0) * k);
      if (std::abs(coeff) < 1e-20) break;
    }
    for (double& v : m) v *= sk;
  }
  return {m[0] - 2.0 * m[1] + m[2], m[1] - m[2], m[2]};
}

// Symmetric tridiagonal block B(j, l) = (1/2pi) int_R w(|xi|) g_j g_l dxi over
// the cosine family, assembled from the half-line elements (factor 2 from
// evenness folded into 1/pi).
template <typename LocalFn>
std::vector<Eigen::Triplet<double>> band_block(int bands, double scale, LocalFn local) {
  std::vector<double> diag(bands + 1, 0.0);
  std::vector<double> off(bands, 0.0);
  for (int k = 0; k < bands; ++k) {
    const LocalIntegrals li = local(k);
    diag[k] += li[0];
    off[k] += li[1];
    diag[k + 1] += li[2];
  }
  std::vector<Eigen::Triplet<double>> out;
  out.reserve(3 * bands + 1);
  for (int j = 0; j <= bands; ++j) out.emplace_back(j, j, scale * diag[j] / kPi);
  for (int j = 0; j < bands; ++j) {
    out.emplace_back(j, j + 1, scale * off[j] / kPi);
    out.emplace_back(j + 1, j, scale * off[j] / kPi);
  }
  return out;
}

}  // namespace

TemporalBasis::TemporalBasis(int bands, double tau) : bands_(bands), tau_(tau) {
  if (bands < 1) throw Error(ErrorKind::InvalidParameter, "number of bands N must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::InvalidParameter, "spectral spacing tau must be positive");
  }
}

TemporalBasis new_basis(int bands, double tau) { return TemporalBasis(bands, tau); }

void TemporalBasis::check_index(int idx) const {
  if (idx < 0 || idx >= dim()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "basis index " + std::to_string(idx) + " outside [0, " + std::to_string(dim()) + ")");
  }
}

std::complex<double> TemporalBasis::fourier_eval(int idx, double omega) const {
  check_index(idx);
  const double g = half_line_hat(band_of(idx), bands_, tau_, std::abs(omega));
  if (!is_sine(idx)) return {g, 0.0};
  const double sgn = omega > 0.0 ? 1.0 : (omega < 0.0 ? -1.0 : 0.0);
  return {0.0, -sgn * g};
}

double TemporalBasis::time_eval(int idx, double t) const {
  check_index(idx);
  const int j = band_of(idx);
  const double x = tau_ * t;
  const double amp = tau_ / kPi;
  if (j == bands_) {
    return is_sine(idx) ? amp * top_sin_profile(bands_, x) : amp * top_cos_profile(bands_, x);
  }
  if (j == 0) {
    return is_sine(idx) ? amp * x_minus_sin_over_sq(x) : amp * one_minus_cos_over_sq(x);
  }
  const double env = 2.0 * amp * one_minus_cos_over_sq(x);
  return is_sine(idx) ? env * std::sin(j * x) : env * std::cos(j * x);
}

Eigen::VectorXd TemporalBasis::time_eval_all(double t) const {
  Eigen::VectorXd out(dim());
  const double x = tau_ * t;
  const double amp = tau_ / kPi;
  const double env = 2.0 * amp * one_minus_cos_over_sq(x);
  out[cos_index(0)] = amp * one_minus_cos_over_sq(x);
  out[sin_index(0)] = amp * x_minus_sin_over_sq(x);
  for (int j = 1; j < bands_; ++j) {
    out[cos_index(j)] = env * std::cos(j * x);
    out[sin_index(j)] = env * std::sin(j * x);
  }
  out[cos_index(bands_)] = amp * top_cos_profile(bands_, x);
  out[sin_index(bands_)] = amp * top_sin_profile(bands_, x);
  return out;
}

Eigen::MatrixXd TemporalBasis::time_eval_matrix(std::span<const double> times) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), dim());
  for (std::size_t q = 0; q < times.size(); ++q) {
    out.row(static_cast<Eigen::Index>(q)) = time_eval_all(times[q]).transpose();
  }
  return out;
}

const char* to_string(GramKind kind) {
  switch (kind) {
    case GramKind::Mass: return "Mass";
    case GramKind::HalfPlusMinus: return "HalfPlusMinus";
    case GramKind::HalfPlusPlus: return "HalfPlusPlus";
    case GramKind::QuarterQuarter: return "QuarterQuarter";
  }
  return "?";
}

TemporalGram gram(const TemporalBasis& basis, GramKind kind) {
  const int n = basis.bands();
  const double tau = basis.tau();
  std::vector<Eigen::Triplet<double>> block;
  switch (kind) {
    case GramKind::Mass:
      block = band_block(n, tau, unit_weight_integrals);
      break;
    case GramKind::HalfPlusMinus:
    case GramKind::HalfPlusPlus:
      block = band_block(n, tau * tau, linear_weight_integrals);
      break;
    case GramKind::QuarterQuarter:
      block = band_block(n, tau * std::sqrt(tau), sqrt_weight_integrals);
      break;
  }

  // Even weights give block-diagonal (cos, sin) structure; the weight i*xi
  // couples the families: form(psi_k, psi~_l) = -B, form(psi~_k, psi_l) = +B.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * block.size());
  const int off = n + 1;
  for (const auto& e : block) {
    if (kind == GramKind::HalfPlusMinus) {
      triplets.emplace_back(e.row(), off + e.col(), -e.value());
      triplets.emplace_back(off + e.row(), e.col(), e.value());
    } else {
      triplets.emplace_back(e.row(), e.col(), e.value());
      triplets.emplace_back(off + e.row(), off + e.col(), e.value());
    }
  }
  SparseMatrix m(basis.dim(), basis.dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {kind, std::move(m)};
}

SparseMatrix hilbert_matrix(const TemporalBasis& basis) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(basis.dim());
  for (int j = 0; j <= basis.bands(); ++j) {
    triplets.emplace_back(basis.sin_index(j), basis.cos_index(j), 1.0);
    triplets.emplace_back(basis.cos_index(j), basis.sin_index(j), -1.0);
  }
  SparseMatrix h(basis.dim(), basis.dim());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

}  // namespace stdd
