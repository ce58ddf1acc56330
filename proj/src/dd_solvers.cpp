#include "stdd/dd_solvers.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <limits>
#include <unsupported/Eigen/KroneckerProduct>

#include "stdd/error.hpp"

namespace stdd {

const char* to_string(Method method) {
  switch (method) {
    case Method::MDN1: return "MDN1";
    case Method::MDN2: return "MDN2";
    case Method::RR: return "RR";
    case Method::Monolithic: return "Monolithic";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "MDN1") return Method::MDN1;
  if (upper == "MDN2") return Method::MDN2;
  if (upper == "RR") return Method::RR;
  if (upper == "MONOLITHIC") return Method::Monolithic;
  throw Error(ErrorKind::InvalidParameter, "unknown method '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidParameter, "s must be positive");
  if ((method == Method::MDN1 || method == Method::MDN2) && !(phi > 0.0 && phi < std::numbers::pi / 2.0)) {
    throw Error(ErrorKind::InvalidParameter, "phi must lie in (0, pi/2) for MDN");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tol must be positive");
  if (max_outer < 1) throw Error(ErrorKind::InvalidParameter, "max_outer must be >= 1");
  if (!(inner.tol > 0.0) || inner.max_iter < 1 || !(inner.s_inner > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "invalid inner iteration settings");
  }
}

std::optional<double> fit_contraction(const std::vector<double>& increments) {
  if (increments.size() < 4) return std::nullopt;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t i = 1; i < increments.size(); ++i) {
    if (!(increments[i] > 0.0) || !std::isfinite(increments[i])) continue;
    const double x = static_cast<double>(i + 1);
    const double y = std::log(increments[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::nullopt;
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return std::exp((m * sxy - sx * sy) / denom);
}

namespace {

using LU = Eigen::SparseLU<SparseMatrix>;
using LDLT = Eigen::SimplicialLDLT<SparseMatrix>;

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b).eval();
  out.makeCompressed();
  return out;
}

std::unique_ptr<LU> factor_lu(const SparseMatrix& a, const char* what) {
  auto lu = std::make_unique<LU>();
  lu->analyzePattern(a);
  lu->factorize(a);
  if (lu->info() != Eigen::Success) {
    throw Error(ErrorKind::LinearSolveFailure, std::string("sparse LU failed for ") + what + ": " +
                                                   lu->lastErrorMessage());
  }
  return lu;
}

std::unique_ptr<LDLT> factor_ldlt(const SparseMatrix& a, const char* what) {
  auto ldlt = std::make_unique<LDLT>(a);
  if (ldlt->info() != Eigen::Success) {
    throw Error(ErrorKind::LinearSolveFailure, std::string("Cholesky failed for ") + what);
  }
  return ldlt;
}

std::vector<int> iota(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

// Rotated Zarantello iteration x <- x + s G^-1 (H^phi (x) I)^T r(x) on the dofs
// listed in `free`; the remaining entries of x stay fixed.
Eigen::VectorXd zarantello(Eigen::VectorXd x, const std::vector<int>& free, int spatial_dim,
                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& rhs_minus_operator,
                           const LDLT& g_solver, const SparseMatrix& g_free, const RotatedIdentity& rot,
                           const InnerConfig& cfg, const std::string& what, long* inner_iterations) {
  const auto nf = static_cast<Eigen::Index>(free.size());
  double previous = std::numeric_limits<double>::infinity();
  int increases = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const Eigen::VectorXd r = rot.adjoint_apply_spacetime(rhs_minus_operator(x), spatial_dim);
    Eigen::VectorXd d(nf);
    for (Eigen::Index i = 0; i < nf; ++i) d[i] = r[free[static_cast<std::size_t>(i)]];
    const Eigen::VectorXd delta = cfg.s_inner * g_solver.solve(d);
    Eigen::VectorXd xf(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      double& entry = x[free[static_cast<std::size_t>(i)]];
      entry += delta[i];
      xf[i] = entry;
    }
    if (inner_iterations) ++*inner_iterations;
    const double step = std::sqrt(std::max(0.0, delta.dot(g_free * delta)));
    const double size = std::sqrt(std::max(0.0, xf.dot(g_free * xf)));
    if (!std::isfinite(step)) {
      throw Error(ErrorKind::InnerDivergence, what + ": inner increment is not finite at iteration " +
                                                  std::to_string(it));
    }
    if (step <= cfg.tol * size || step == 0.0) return x;
    increases = step > previous ? increases + 1 : 0;
    if (increases >= 5) {
      throw Error(ErrorKind::InnerDivergence,
                  what + ": inner increment grew 5 times in a row (iteration " + std::to_string(it) + ")");
    }
    previous = step;
  }
  throw Error(ErrorKind::InnerDivergence,
              what + ": inner iteration did not reach tol in " + std::to_string(cfg.max_iter) + " iterations");
}

}  // namespace

struct TransmissionProblem::RegionData {
  Region region;
  RegionLayout layout;
  std::unique_ptr<RegionResidual> residual;
  Eigen::VectorXd load;
  SparseMatrix g;  // D++ (x) M + T (x) K over all free dofs
  SparseMatrix interface_mass;  // J (x) e_G e_G^T
  // Linear case.
  std::unique_ptr<LU> a_lu;  // interior block (subdomains) or full matrix (whole)
  SparseMatrix a_ig;
  // Nonlinear case.
  SparseMatrix g_free;
  std::unique_ptr<LDLT> g_ldlt;
  std::vector<int> all;

  RegionData(Region r, const TemporalBasis& basis, const SpatialMesh& mesh) : region(r), layout(basis, mesh, r) {}

  const std::vector<int>& dirichlet_free() const { return region == Region::Whole ? all : layout.interior; }
  int ns() const { return layout.spatial_dim; }
};

struct TransmissionProblem::RobinCache {
  Region region;
  double s;
  std::unique_ptr<LU> lu;
  SparseMatrix g;
  std::unique_ptr<LDLT> ldlt;
};

TransmissionProblem::TransmissionProblem(const TemporalBasis& basis, const SpatialMesh& mesh, Nonlinearity nl,
                                         SourceTerm f, QuadratureSpec quad, InnerConfig inner)
    : basis_(basis), mesh_(mesh), nl_(std::move(nl)), f_(std::move(f)), quad_(quad), inner_(inner) {
  const bool is_linear = nl_.affine && nl_.principal.has_value();
  std::shared_ptr<const TimeSampling> sampling;
  if (!is_linear) sampling = residual_sampling(basis_, quad_);
  const SparseMatrix t_mass = gram(basis_, GramKind::Mass).matrix;

  auto build = [&](Region r) {
    auto rd = std::make_unique<RegionData>(r, basis_, mesh_);
    rd->residual = std::make_unique<RegionResidual>(r, nl_, basis_, mesh_, quad_, true, sampling);
    rd->load = load_vector(r, f_, basis_, mesh_, quad_).values;
    rd->g = inner_product_matrix(r, basis_, mesh_);
    rd->all = iota(rd->layout.size());
    if (r != Region::Whole) {
      const int ns = rd->ns();
      SparseMatrix e(ns, ns);
      e.insert(rd->layout.interface_local, rd->layout.interface_local) = 1.0;
      rd->interface_mass = kron(t_mass, e);
    }
    const auto& free = rd->dirichlet_free();
    if (is_linear) {
      const SparseMatrix& a = rd->residual->linear_part();
      if (r == Region::Whole) {
        rd->a_lu = factor_lu(a, "whole-domain system");
      } else {
        rd->a_lu = factor_lu(extract(a, free, free), "subdomain interior block");
        rd->a_ig = extract(a, free, rd->layout.interface);
      }
    } else {
      rd->g_free = extract(rd->g, free, free);
      rd->g_ldlt = factor_ldlt(rd->g_free, "inner-solver matrix G");
    }
    return rd;
  };
  sub1_ = build(Region::Sub1);
  sub2_ = build(Region::Sub2);
  whole_ = build(Region::Whole);
  j_ = interface_riesz(basis_);
  j_llt_.compute(j_.matrix);
  if (j_llt_.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "interface Riesz map is not SPD");
}

TransmissionProblem::~TransmissionProblem() = default;

bool TransmissionProblem::linear() const { return nl_.affine && nl_.principal.has_value(); }

int TransmissionProblem::spatial_dim(Region region) const { return data(region).ns(); }

const TransmissionProblem::RegionData& TransmissionProblem::data(Region region) const {
  switch (region) {
    case Region::Sub1: return *sub1_;
    case Region::Sub2: return *sub2_;
    case Region::Whole: return *whole_;
  }
  return *whole_;
}

const SparseMatrix& TransmissionProblem::interior_inner_product(Region region) const {
  const RegionData& rd = data(region);
  if (rd.g_free.size() == 0) {
    throw Error(ErrorKind::InvalidParameter, "interior inner-product matrix is only assembled for nonlinear problems");
  }
  return rd.g_free;
}

SpaceTimeDual TransmissionProblem::region_residual(Region region, const SpaceTimeField& u) const {
  const RegionData& rd = data(region);
  SpaceTimeDual r = (*rd.residual)(u);
  r.values -= rd.load;
  return r;
}

SpaceTimeField TransmissionProblem::dirichlet_solve(Region region, const InterfaceTrace& eta,
                                                    const SpaceTimeField* warm, long* inner_iterations) const {
  const RegionData& rd = data(region);
  const int dim = basis_.dim();
  SpaceTimeField u = SpaceTimeField::zero(region, dim, rd.ns());
  if (region != Region::Whole) {
    if (eta.coeffs.size() != dim) throw Error(ErrorKind::InvalidParameter, "interface trace has wrong length");
    for (int a = 0; a < dim; ++a) u.coeffs[rd.layout.interface[static_cast<std::size_t>(a)]] = eta.coeffs[a];
  }
  const auto& free = rd.dirichlet_free();
  if (linear()) {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = rd.load[free[i]];
    if (region != Region::Whole) rhs -= rd.a_ig * eta.coeffs;
    const Eigen::VectorXd x = rd.a_lu->solve(rhs);
    if (rd.a_lu->info() != Eigen::Success) throw Error(ErrorKind::LinearSolveFailure, "subdomain solve failed");
    for (std::size_t i = 0; i < free.size(); ++i) u.coeffs[free[i]] = x[static_cast<Eigen::Index>(i)];
    return u;
  }
  if (warm && warm->coeffs.size() == u.coeffs.size()) {
    for (int idx : free) u.coeffs[idx] = warm->coeffs[idx];
  }
  const RotatedIdentity rot(basis_, inner_.phi_inner);
  auto op = [&](const Eigen::VectorXd& x) {
    const SpaceTimeField field{region, dim, rd.ns(), x};
    return Eigen::VectorXd(-region_residual(region, field).values);
  };
  u.coeffs = zarantello(std::move(u.coeffs), free, rd.ns(), op, *rd.g_ldlt, rd.g_free, rot, inner_,
                        std::string("dirichlet solve on ") + to_string(region), inner_iterations);
  return u;
}

InterfaceDual TransmissionProblem::apply_steklov(Region region, const InterfaceTrace& eta, SpaceTimeField* field,
                                                 const SpaceTimeField* warm, long* inner_iterations) const {
  if (region == Region::Whole) throw Error(ErrorKind::InvalidParameter, "Steklov operator needs a subdomain");
  const RegionData& rd = data(region);
  SpaceTimeField u = dirichlet_solve(region, eta, warm, inner_iterations);
  const Eigen::VectorXd r = region_residual(region, u).values;
  InterfaceDual out{Eigen::VectorXd(basis_.dim())};
  for (int a = 0; a < basis_.dim(); ++a) out.values[a] = r[rd.layout.interface[static_cast<std::size_t>(a)]];
  if (field) *field = std::move(u);
  return out;
}

const TransmissionProblem::RobinCache& TransmissionProblem::robin(const RegionData& rd, double s) const {
  std::lock_guard<std::mutex> lock(robin_mutex_);
  for (const auto& c : robin_cache_) {
    if (c->region == rd.region && c->s == s) return *c;
  }
  auto c = std::make_unique<RobinCache>();
  c->region = rd.region;
  c->s = s;
  if (linear()) {
    SparseMatrix a = rd.residual->linear_part() + s * rd.interface_mass;
    c->lu = factor_lu(a, "Robin subdomain system");
  } else {
    c->g = rd.g + s * rd.interface_mass;
    c->ldlt = factor_ldlt(c->g, "Robin inner-solver matrix");
  }
  robin_cache_.push_back(std::move(c));
  return *robin_cache_.back();
}

InterfaceTrace TransmissionProblem::robin_solve(Region region, const InterfaceDual& lambda, double s,
                                                SpaceTimeField* field, const SpaceTimeField* warm,
                                                long* inner_iterations) const {
  if (region == Region::Whole) throw Error(ErrorKind::InvalidParameter, "Robin solve needs a subdomain");
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidParameter, "Robin parameter s must be positive");
  const RegionData& rd = data(region);
  const int dim = basis_.dim();
  if (lambda.values.size() != dim) throw Error(ErrorKind::InvalidParameter, "Robin data has wrong length");
  const RobinCache& cache = robin(rd, s);

  Eigen::VectorXd rhs = rd.load;
  for (int a = 0; a < dim; ++a) rhs[rd.layout.interface[static_cast<std::size_t>(a)]] += lambda.values[a];

  SpaceTimeField u = SpaceTimeField::zero(region, dim, rd.ns());
  if (linear()) {
    u.coeffs = cache.lu->solve(rhs);
    if (cache.lu->info() != Eigen::Success) throw Error(ErrorKind::LinearSolveFailure, "Robin solve failed");
  } else {
    if (warm && warm->coeffs.size() == u.coeffs.size()) u.coeffs = warm->coeffs;
    const RotatedIdentity rot(basis_, inner_.phi_inner);
    auto op = [&](const Eigen::VectorXd& x) {
      const SpaceTimeField f{region, dim, rd.ns(), x};
      return Eigen::VectorXd(rhs - (*rd.residual)(f).values - s * (rd.interface_mass * x));
    };
    u.coeffs = zarantello(std::move(u.coeffs), rd.all, rd.ns(), op, *cache.ldlt, cache.g, rot, inner_,
                          std::string("Robin solve on ") + to_string(region), inner_iterations);
  }
  InterfaceTrace eta = interface_trace_of(u);
  if (field) *field = std::move(u);
  return eta;
}

SpaceTimeField TransmissionProblem::monolithic_solve(long* inner_iterations) const {
  return dirichlet_solve(Region::Whole, InterfaceTrace{}, nullptr, inner_iterations);
}

InterfaceTrace TransmissionProblem::interface_trace(const SpaceTimeField& whole) const {
  const int ns = whole_->ns();
  const int g = mesh_.interface_node() - 1;
  InterfaceTrace eta{Eigen::VectorXd(basis_.dim())};
  for (int a = 0; a < basis_.dim(); ++a) eta.coeffs[a] = whole.coeffs[static_cast<Eigen::Index>(a) * ns + g];
  return eta;
}

InterfaceTrace TransmissionProblem::interface_trace_of(const SpaceTimeField& sub) const {
  const RegionData& rd = data(sub.region);
  InterfaceTrace eta{Eigen::VectorXd(basis_.dim())};
  for (int a = 0; a < basis_.dim(); ++a) eta.coeffs[a] = sub.coeffs[rd.layout.interface[static_cast<std::size_t>(a)]];
  return eta;
}

SpaceTimeField TransmissionProblem::restrict_to(Region region, const SpaceTimeField& whole) const {
  const RegionData& rd = data(region);
  const int ns_whole = whole_->ns();
  const int offset = mesh_.region_nodes(region).front() - 1;
  SpaceTimeField u = SpaceTimeField::zero(region, basis_.dim(), rd.ns());
  for (int a = 0; a < basis_.dim(); ++a) {
    for (int k = 0; k < rd.ns(); ++k) {
      u.coeffs[static_cast<Eigen::Index>(a) * rd.ns() + k] =
          whole.coeffs[static_cast<Eigen::Index>(a) * ns_whole + k + offset];
    }
  }
  return u;
}

const InterfaceOperator& TransmissionProblem::p1() const {
  std::call_once(p1_once_, [&] { p1_ = std::make_unique<InterfaceOperator>(p1_matrix(basis_, mesh_)); });
  return *p1_;
}

const InterfaceOperator& TransmissionProblem::p2() const {
  std::call_once(p2_once_, [&] { p2_ = std::make_unique<InterfaceOperator>(p2_matrix(basis_, mesh_)); });
  return *p2_;
}

double TransmissionProblem::j_norm(const Eigen::VectorXd& eta) const {
  return std::sqrt(std::max(0.0, eta.dot(j_.matrix * eta)));
}

double TransmissionProblem::j_dual_norm(const Eigen::VectorXd& r) const {
  return std::sqrt(std::max(0.0, r.dot(j_llt_.solve(r))));
}

namespace {

// Shared bookkeeping of the outer iterations.  Convergence is judged on the
// relative increment; divergence on the absolute step, since the relative
// value saturates near 1 once the iterates blow up.
class OuterMonitor {
 public:
  OuterMonitor(IterationTrace& trace, const SolverConfig& cfg) : trace_(trace), cfg_(cfg) {}

  // Returns true when the iteration should stop.
  bool record(int n, double increment, double step, double residual, std::optional<double> e_e) {
    trace_.n.push_back(n);
    trace_.increment.push_back(increment);
    trace_.residual.push_back(residual);
    if (e_e) trace_.e_e.push_back(*e_e);
    if (!std::isfinite(increment) || !std::isfinite(step)) {
      trace_.diverged = true;
      return true;
    }
    if (increment <= cfg_.tol) {
      trace_.converged = true;
      return true;
    }
    increases_ = step > previous_step_ ? increases_ + 1 : 0;
    previous_step_ = step;
    if (increases_ >= 5) {
      trace_.diverged = true;
      return true;
    }
    const std::size_t m = trace_.increment.size();
    if (m > 10 && increment >= trace_.increment[m - 11]) trace_.stagnated = true;
    return false;
  }

 private:
  IterationTrace& trace_;
  const SolverConfig& cfg_;
  int increases_ = 0;
  double previous_step_ = std::numeric_limits<double>::infinity();
};

std::string at_iteration(const char* method, int n) {
  return std::string(method) + " iteration " + std::to_string(n) + ": ";
}

[[noreturn]] void rethrow_with_context(const Error& e, const char* method, int n) {
  throw Error(e.kind(), at_iteration(method, n) + e.what());
}

double relative(double step, double size) { return size > 0.0 ? step / size : step; }

}  // namespace

DDResult mdn_run(const TransmissionProblem& problem, const SolverConfig& cfg,
                 const std::optional<InterfaceTrace>& eta0, const ErrorFunctional& error) {
  cfg.validate();
  if (cfg.method != Method::MDN1 && cfg.method != Method::MDN2) {
    throw Error(ErrorKind::InvalidParameter, "mdn_run needs method MDN1 or MDN2");
  }
  const char* name = to_string(cfg.method);
  const int dim = problem.temporal_dim();
  const Eigen::MatrixXd& p = cfg.method == Method::MDN1 ? problem.p1().matrix : problem.p2().matrix;
  const Eigen::LLT<Eigen::MatrixXd> p_llt(p);
  if (p_llt.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "MDN preconditioner is not SPD");
  const RotatedIdentity rot(problem.basis(), cfg.phi);
  auto p_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(p * v))); };

  DDResult out;
  out.eta = eta0.value_or(InterfaceTrace{Eigen::VectorXd::Zero(dim)});
  out.u1 = SpaceTimeField::zero(Region::Sub1, dim, problem.spatial_dim(Region::Sub1));
  out.u2 = SpaceTimeField::zero(Region::Sub2, dim, problem.spatial_dim(Region::Sub2));
  OuterMonitor monitor(out.trace, cfg);
  long inner1 = 0, inner2 = 0;

  for (int n = 1; n <= cfg.max_outer; ++n) {
    InterfaceDual s1, s2;
    try {
      SpaceTimeField w1 = out.u1, w2 = out.u2;
      if (cfg.concurrent) {
        auto second = std::async(std::launch::async, [&] {
          return problem.apply_steklov(Region::Sub2, out.eta, &out.u2, &w2, &inner2);
        });
        s1 = problem.apply_steklov(Region::Sub1, out.eta, &out.u1, &w1, &inner1);
        s2 = second.get();
      } else {
        s1 = problem.apply_steklov(Region::Sub1, out.eta, &out.u1, &w1, &inner1);
        s2 = problem.apply_steklov(Region::Sub2, out.eta, &out.u2, &w2, &inner2);
      }
    } catch (const Error& e) {
      rethrow_with_context(e, name, n);
    }
    const Eigen::VectorXd res = s1.values + s2.values;
    const InterfaceDual rotated = rot.adjoint_apply(InterfaceDual{-res});
    const Eigen::VectorXd step = cfg.s * p_llt.solve(rotated.values);
    out.eta.coeffs += step;
    std::optional<double> ee;
    if (error) ee = error(out.u1, out.u2);
    const double step_norm = p_norm(step);
    if (monitor.record(n, relative(step_norm, p_norm(out.eta.coeffs)), step_norm, problem.j_dual_norm(res), ee)) {
      break;
    }
  }
  out.trace.inner_iterations = inner1 + inner2;
  out.trace.fitted_L = fit_contraction(out.trace.increment);
  if (!out.trace.diverged) {
    // Fields consistent with the returned trace.
    long extra = 0;
    try {
      out.u1 = problem.dirichlet_solve(Region::Sub1, out.eta, &out.u1, &extra);
      out.u2 = problem.dirichlet_solve(Region::Sub2, out.eta, &out.u2, &extra);
    } catch (const Error& e) {
      rethrow_with_context(e, name, static_cast<int>(out.trace.size()));
    }
    out.trace.inner_iterations += extra;
  }
  return out;
}

DDResult rr_run(const TransmissionProblem& problem, const SolverConfig& cfg,
                const std::optional<InterfaceTrace>& eta0, const ErrorFunctional& error) {
  cfg.validate();
  if (cfg.method != Method::RR) throw Error(ErrorKind::InvalidParameter, "rr_run needs method RR");
  const char* name = to_string(cfg.method);
  const int dim = problem.temporal_dim();
  const Eigen::MatrixXd& j = problem.riesz().matrix;
  const double s = cfg.s;

  DDResult out;
  out.eta = eta0.value_or(InterfaceTrace{Eigen::VectorXd::Zero(dim)});
  out.u1 = SpaceTimeField::zero(Region::Sub1, dim, problem.spatial_dim(Region::Sub1));
  out.u2 = SpaceTimeField::zero(Region::Sub2, dim, problem.spatial_dim(Region::Sub2));
  SpaceTimeField d1 = out.u1, d2 = out.u2;  // Dirichlet fields, warm starts only
  OuterMonitor monitor(out.trace, cfg);
  long inner = 0, inner_aux = 0;

  for (int n = 1; n <= cfg.max_outer; ++n) {
    Eigen::VectorXd res;
    InterfaceTrace next;
    try {
      // Residual of the interface equation at eta^n; S1 eta^n is diagnostic only.
      auto diag = std::async(cfg.concurrent ? std::launch::async : std::launch::deferred, [&] {
        SpaceTimeField warm = d1;
        return problem.apply_steklov(Region::Sub1, out.eta, &d1, &warm, &inner_aux);
      });
      SpaceTimeField warm2 = d2;
      const InterfaceDual s2 = problem.apply_steklov(Region::Sub2, out.eta, &d2, &warm2, &inner);
      const InterfaceDual mu{s * (j * out.eta.coeffs) - s2.values};
      SpaceTimeField warm = out.u1;
      const InterfaceTrace xi = problem.robin_solve(Region::Sub1, mu, s, &out.u1, &warm, &inner);
      const InterfaceDual s1xi = problem.apply_steklov(Region::Sub1, xi, nullptr, &out.u1, &inner);
      const InterfaceDual nu{s * (j * xi.coeffs) - s1xi.values};
      warm = out.u2;
      next = problem.robin_solve(Region::Sub2, nu, s, &out.u2, &warm, &inner);
      res = diag.get().values + s2.values;
    } catch (const Error& e) {
      rethrow_with_context(e, name, n);
    }
    const Eigen::VectorXd step = next.coeffs - out.eta.coeffs;
    out.eta = std::move(next);
    std::optional<double> ee;
    if (error) ee = error(out.u1, out.u2);
    const double step_norm = problem.j_norm(step);
    if (monitor.record(n, relative(step_norm, problem.j_norm(out.eta.coeffs)), step_norm, problem.j_dual_norm(res),
                       ee)) {
      break;
    }
  }
  out.trace.inner_iterations = inner + inner_aux;
  out.trace.fitted_L = fit_contraction(out.trace.increment);
  return out;
}

DDResult dd_run(const TransmissionProblem& problem, const SolverConfig& cfg,
                const std::optional<InterfaceTrace>& eta0, const ErrorFunctional& error) {
  switch (cfg.method) {
    case Method::MDN1:
    case Method::MDN2: return mdn_run(problem, cfg, eta0, error);
    case Method::RR: return rr_run(problem, cfg, eta0, error);
    case Method::Monolithic: break;
  }
  throw Error(ErrorKind::InvalidParameter, "dd_run does not handle the monolithic method");
}

}  // namespace stdd
