#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "stdd/spacetime_system.hpp"

namespace stdd {

enum class Method { MDN1, MDN2, RR, Monolithic };

const char* to_string(Method method);
/// Accepts "MDN1", "MDN2", "RR", "Monolithic" (case-insensitive).
Method parse_method(const std::string& name);

/// Rotated Zarantello iteration used for every nonlinear subdomain or
/// whole-domain solve.
struct InnerConfig {
  double tol = 1e-8;  // relative increment in the G-norm
  int max_iter = 500;
  double s_inner = 0.7;
  double phi_inner = std::numbers::pi / 4.0;
};

struct SolverConfig {
  Method method = Method::MDN1;
  double phi = 0.02 * std::numbers::pi;
  double s = 0.55;
  double tol = 1e-10;
  int max_outer = 200;
  InnerConfig inner;
  bool concurrent = true;  // run the two Steklov applications of an MDN step in parallel

  void validate() const;
};

/// Per-iteration record of an outer iteration.  Entry n belongs to the n-th
/// step: increment = ||eta^{n} - eta^{n-1}|| relative to ||eta^{n}|| in the
/// method norm, residual = ||S eta^{n-1}||_{J^-1}, e_e from the subdomain
/// fields computed during the step (empty when no error functional is given).
struct IterationTrace {
  std::vector<int> n;
  std::vector<double> increment;
  std::vector<double> residual;
  std::vector<double> e_e;
  std::optional<double> fitted_L;
  bool converged = false;
  bool diverged = false;
  bool stagnated = false;
  long inner_iterations = 0;

  std::size_t size() const { return n.size(); }
};

/// Least-squares slope of log(increment) over iterations 2..n, exponentiated.
/// Empty when fewer than 4 increments are available.
std::optional<double> fit_contraction(const std::vector<double>& increments);

/// e_e-style functional of the two subdomain fields.
using ErrorFunctional = std::function<double(const SpaceTimeField& u1, const SpaceTimeField& u2)>;

struct DDResult {
  InterfaceTrace eta;
  SpaceTimeField u1;
  SpaceTimeField u2;
  IterationTrace trace;
};

/// Discrete transmission problem: the space-time operators of both
/// subdomains and the whole domain for one (nonlinearity, source) pair, with
/// the factorizations shared by all solves.  Methods are safe to call from
/// several threads at once.
class TransmissionProblem {
 public:
  TransmissionProblem(const TemporalBasis& basis, const SpatialMesh& mesh, Nonlinearity nl, SourceTerm f,
                      QuadratureSpec quad = {}, InnerConfig inner = {});
  ~TransmissionProblem();
  TransmissionProblem(const TransmissionProblem&) = delete;
  TransmissionProblem& operator=(const TransmissionProblem&) = delete;

  const TemporalBasis& basis() const { return basis_; }
  const SpatialMesh& mesh() const { return mesh_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  bool linear() const;
  int temporal_dim() const { return basis_.dim(); }
  int spatial_dim(Region region) const;

  /// a_i(u, v_k) - (f, v_k) for every free test function of the region.
  SpaceTimeDual region_residual(Region region, const SpaceTimeField& u) const;

  /// u_i with interface coefficients eta solving the interior Galerkin
  /// equations.  `warm` seeds the nonlinear inner iteration.
  SpaceTimeField dirichlet_solve(Region region, const InterfaceTrace& eta, const SpaceTimeField* warm = nullptr,
                                 long* inner_iterations = nullptr) const;

  /// Interface rows of a_i(u_i, .) - (f_i, .) with u_i = dirichlet_solve.
  InterfaceDual apply_steklov(Region region, const InterfaceTrace& eta, SpaceTimeField* field = nullptr,
                              const SpaceTimeField* warm = nullptr, long* inner_iterations = nullptr) const;

  /// Solves a_i(u, v) + s (Tu, Tv)_J = (f, v) + <lambda, Tv> over all free dofs
  /// of the region and returns Tu.
  InterfaceTrace robin_solve(Region region, const InterfaceDual& lambda, double s, SpaceTimeField* field = nullptr,
                             const SpaceTimeField* warm = nullptr, long* inner_iterations = nullptr) const;

  /// Undecomposed discrete solve on the whole domain.
  SpaceTimeField monolithic_solve(long* inner_iterations = nullptr) const;

  InterfaceTrace interface_trace(const SpaceTimeField& whole) const;
  InterfaceTrace interface_trace_of(const SpaceTimeField& sub) const;
  /// Restriction of a whole-domain field to a subdomain.
  SpaceTimeField restrict_to(Region region, const SpaceTimeField& whole) const;

  const InterfaceOperator& p1() const;
  const InterfaceOperator& p2() const;
  const InterfaceOperator& riesz() const { return j_; }

  double j_norm(const Eigen::VectorXd& eta) const;
  /// ||r||_{J^-1} of a dual interface vector.
  double j_dual_norm(const Eigen::VectorXd& r) const;

  /// Subdomain inner-solver matrix G restricted to the interior dofs.
  const SparseMatrix& interior_inner_product(Region region) const;

 private:
  struct RegionData;
  struct RobinCache;

  const RegionData& data(Region region) const;
  const RobinCache& robin(const RegionData& rd, double s) const;

  TemporalBasis basis_;
  SpatialMesh mesh_;
  Nonlinearity nl_;
  SourceTerm f_;
  QuadratureSpec quad_;
  InnerConfig inner_;
  std::unique_ptr<RegionData> sub1_, sub2_, whole_;
  InterfaceOperator j_;
  Eigen::LLT<Eigen::MatrixXd> j_llt_;
  mutable std::once_flag p1_once_, p2_once_;
  mutable std::unique_ptr<InterfaceOperator> p1_, p2_;
  mutable std::mutex robin_mutex_;
  mutable std::vector<std::unique_ptr<RobinCache>> robin_cache_;
};

/// Modified Dirichlet-Neumann iteration, preconditioner P1 (MDN1) or P2 (MDN2).
DDResult mdn_run(const TransmissionProblem& problem, const SolverConfig& cfg,
                 const std::optional<InterfaceTrace>& eta0 = std::nullopt, const ErrorFunctional& error = nullptr);

/// Robin-Robin iteration (sJ+S2)^-1 (sJ-S1) (sJ+S1)^-1 (sJ-S2).
DDResult rr_run(const TransmissionProblem& problem, const SolverConfig& cfg,
                const std::optional<InterfaceTrace>& eta0 = std::nullopt, const ErrorFunctional& error = nullptr);

/// Dispatches on cfg.method (Monolithic is rejected).
DDResult dd_run(const TransmissionProblem& problem, const SolverConfig& cfg,
                const std::optional<InterfaceTrace>& eta0 = std::nullopt, const ErrorFunctional& error = nullptr);

}  // namespace stdd
