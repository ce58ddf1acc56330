#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stdd/bench/config.hpp"
#include "stdd/dd_solvers.hpp"

namespace stdd::bench {

/// Closed-form benchmark pair on (0, 1) x R: u and its x-derivative vanish
/// for t <= 0, and d_t u - d_xx u = f.
struct ManufacturedProblem {
  SourceTerm f;
  std::function<double(double t, double x)> u;
  std::function<double(double t, double x)> u_x;
};

ManufacturedProblem manufactured_problem();

/// Smooth source amplitude * b(t) sin(pi x) with b supported in (0, 2).
SourceTerm bump_source(double amplitude);

/// Evaluates e_e on (0, 1) x Omega_1 and Omega_2 against a reference that is
/// either a closed form or a discrete whole-domain field.
class ErrorFunctionalEvaluator {
 public:
  ErrorFunctionalEvaluator(const TemporalBasis& basis, const SpatialMesh& mesh, int time_points = 8,
                           int space_points = 4);

  void set_exact(std::function<double(double, double)> u, std::function<double(double, double)> u_x);
  void set_discrete(const SpaceTimeField& whole);

  double operator()(const SpaceTimeField& u1, const SpaceTimeField& u2) const;

 private:
  struct Sample {
    double value, dx;
  };
  // Reference values at every (time node, spatial point) of one subdomain.
  std::vector<Sample> reference(Region region) const;
  void refresh();

  TemporalBasis basis_;
  SpatialMesh mesh_;
  QuadratureRule time_rule_;
  QuadratureRule space_ref_;
  Eigen::MatrixXd psi_;
  std::function<double(double, double)> u_, u_x_;
  std::optional<SpaceTimeField> discrete_;
  std::vector<Sample> ref1_, ref2_;
  double norm1_ = 0.0, norm2_ = 0.0;
};

/// e_e of a field pair against a closed-form solution.
double error_ee(const std::function<double(double, double)>& u, const std::function<double(double, double)>& u_x,
                const SpaceTimeField& u1, const SpaceTimeField& u2, const TemporalBasis& basis,
                const SpatialMesh& mesh, int time_points = 8);

/// First n (1-based) with |e(n) - e(n+1)| / e(n) < rel.
std::optional<int> plateau_index(const std::vector<double>& e_e, double rel = 1e-3);

struct MethodOutcome {
  MethodSpec spec;
  DDResult result;
  std::optional<int> plateau;
  double plateau_ee = 0.0;
};

struct ExperimentReport {
  std::vector<MethodOutcome> methods;
  double monolithic_ee = 0.0;
  InterfaceTrace monolithic_trace;
};

/// Problem pieces shared by run and sweep.
struct ExperimentSetup {
  TemporalBasis basis;
  SpatialMesh mesh;
  Nonlinearity nl;
  SourceTerm f;
  std::optional<ManufacturedProblem> exact;
};

ExperimentSetup make_setup(const ExperimentConfig& cfg);
SolverConfig solver_config(const ExperimentConfig& cfg, Method method, double phi, double s);
std::optional<InterfaceTrace> initial_guess(const ExperimentConfig& cfg, int dim);

/// Runs every configured method and the monolithic reference.
ExperimentReport run_experiment(const ExperimentConfig& cfg, bool concurrent = true);

struct SweepRow {
  Method method;
  double phi;
  double s;
  bool converged;
  bool diverged;
  int iterations;
  std::optional<double> fitted_L;
};

/// Grid points in config order (methods, then phi, then s), evaluated on up
/// to `threads` worker threads.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int threads);

}  // namespace stdd::bench
