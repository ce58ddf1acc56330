#include "stdd/bench/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "stdd/error.hpp"

namespace stdd::bench {

ManufacturedProblem manufactured_problem() {
  ManufacturedProblem p;
  p.f.causal = true;
  p.f.f = [](double t, double x) {
    if (t <= 0.0) return 0.0;
    const double e1 = std::exp(-t);
    const double eh = std::exp(-0.5 * t);
    return (e1 - 0.5 * eh) * (x * x - x * x * x) + (e1 - eh) * (2.0 - 6.0 * x);
  };
  p.u = [](double t, double x) {
    if (t <= 0.0) return 0.0;
    return (std::exp(-0.5 * t) - std::exp(-t)) * (x * x - x * x * x);
  };
  p.u_x = [](double t, double x) {
    if (t <= 0.0) return 0.0;
    return (std::exp(-0.5 * t) - std::exp(-t)) * (2.0 * x - 3.0 * x * x);
  };
  return p;
}

SourceTerm bump_source(double amplitude) {
  SourceTerm s;
  s.causal = true;
  s.f = [amplitude](double t, double x) {
    const double r = t - 1.0;
    if (std::abs(r) >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - r * r)) * std::sin(std::numbers::pi * x);
  };
  return s;
}

ErrorFunctionalEvaluator::ErrorFunctionalEvaluator(const TemporalBasis& basis, const SpatialMesh& mesh,
                                                   int time_points, int space_points)
    : basis_(basis), mesh_(mesh) {
  QuadratureSpec spec;
  spec.time_points = time_points;
  time_rule_ = spec.time_rule(basis_, 0.0, 1.0);
  space_ref_ = gauss_legendre(space_points);
  psi_ = basis_.time_eval_matrix(time_rule_.nodes);
}

void ErrorFunctionalEvaluator::set_exact(std::function<double(double, double)> u,
                                         std::function<double(double, double)> u_x) {
  u_ = std::move(u);
  u_x_ = std::move(u_x);
  discrete_.reset();
  refresh();
}

void ErrorFunctionalEvaluator::set_discrete(const SpaceTimeField& whole) {
  discrete_ = whole;
  u_ = nullptr;
  u_x_ = nullptr;
  refresh();
}

namespace {

// Nodal values in time of a region field: row q, column = local dof.
Eigen::MatrixXd nodal_in_time(const Eigen::MatrixXd& psi, const SpaceTimeField& u) {
  Eigen::Map<const Eigen::MatrixXd> coeff(u.coeffs.data(), u.spatial_dim, u.temporal_dim);
  return psi * coeff.transpose();
}

// Calls fn(q, element, xi, x, weight, v0, v1) for every sample of `region`
// where v0, v1 are the nodal values of `values` at the element ends.
template <typename Fn>
void for_each_sample(const SpatialMesh& mesh, Region region, const QuadratureRule& time_rule,
                     const QuadratureRule& space_ref, const Eigen::MatrixXd& values, int first_node, Fn fn) {
  const auto [first, last] = mesh.region_elements(region);
  const double h = mesh.h();
  auto value = [&](Eigen::Index q, int node) {
    if (mesh.kind(node) == NodeKind::Boundary) return 0.0;
    return values(q, node - first_node);
  };
  for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(time_rule.size()); ++q) {
    for (int e = first; e < last; ++e) {
      const double v0 = value(q, e);
      const double v1 = value(q, e + 1);
      for (std::size_t s = 0; s < space_ref.size(); ++s) {
        const double xi = 0.5 * (space_ref.nodes[s] + 1.0);
        const double w = time_rule.weights[static_cast<std::size_t>(q)] * 0.5 * space_ref.weights[s] * h;
        fn(q, mesh.node(e) + xi * h, w, (1.0 - xi) * v0 + xi * v1, (v1 - v0) / h);
      }
    }
  }
}

}  // namespace

std::vector<ErrorFunctionalEvaluator::Sample> ErrorFunctionalEvaluator::reference(Region region) const {
  std::vector<Sample> out;
  if (discrete_) {
    const Eigen::MatrixXd values = nodal_in_time(psi_, *discrete_);
    for_each_sample(mesh_, region, time_rule_, space_ref_, values, 1,
                    [&](Eigen::Index, double, double, double v, double dv) { out.push_back({v, dv}); });
  } else {
    const Eigen::MatrixXd none = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(time_rule_.size()),
                                                       mesh_.num_elements() + 1);
    for_each_sample(mesh_, region, time_rule_, space_ref_, none, 0, [&](Eigen::Index q, double x, double, double, double) {
      const double t = time_rule_.nodes[static_cast<std::size_t>(q)];
      out.push_back({u_(t, x), u_x_(t, x)});
    });
  }
  return out;
}

void ErrorFunctionalEvaluator::refresh() {
  ref1_ = reference(Region::Sub1);
  ref2_ = reference(Region::Sub2);
  auto norm = [&](Region region, const std::vector<Sample>& ref) {
    double sum = 0.0;
    std::size_t i = 0;
    const Eigen::MatrixXd none = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(time_rule_.size()),
                                                       mesh_.num_elements() + 1);
    for_each_sample(mesh_, region, time_rule_, space_ref_, none, 0, [&](Eigen::Index, double, double w, double, double) {
      sum += w * (ref[i].value * ref[i].value + ref[i].dx * ref[i].dx);
      ++i;
    });
    return std::sqrt(sum);
  };
  norm1_ = norm(Region::Sub1, ref1_);
  norm2_ = norm(Region::Sub2, ref2_);
}

double ErrorFunctionalEvaluator::operator()(const SpaceTimeField& u1, const SpaceTimeField& u2) const {
  auto error = [&](Region region, const SpaceTimeField& u, const std::vector<Sample>& ref) {
    const Eigen::MatrixXd values = nodal_in_time(psi_, u);
    const int first_node = mesh_.region_nodes(region).front();
    double sum = 0.0;
    std::size_t i = 0;
    for_each_sample(mesh_, region, time_rule_, space_ref_, values, first_node,
                    [&](Eigen::Index, double, double w, double v, double dv) {
                      const double e = ref[i].value - v;
                      const double de = ref[i].dx - dv;
                      sum += w * (e * e + de * de);
                      ++i;
                    });
    return std::sqrt(sum);
  };
  const double denom = norm1_ + norm2_;
  const double num = error(Region::Sub1, u1, ref1_) + error(Region::Sub2, u2, ref2_);
  return denom > 0.0 ? num / denom : num;
}

double error_ee(const std::function<double(double, double)>& u, const std::function<double(double, double)>& u_x,
                const SpaceTimeField& u1, const SpaceTimeField& u2, const TemporalBasis& basis,
                const SpatialMesh& mesh, int time_points) {
  ErrorFunctionalEvaluator eval(basis, mesh, time_points);
  eval.set_exact(u, u_x);
  return eval(u1, u2);
}

std::optional<int> plateau_index(const std::vector<double>& e_e, double rel) {
  for (std::size_t n = 0; n + 1 < e_e.size(); ++n) {
    if (e_e[n] > 0.0 && std::abs(e_e[n] - e_e[n + 1]) / e_e[n] < rel) return static_cast<int>(n) + 1;
  }
  return std::nullopt;
}

ExperimentSetup make_setup(const ExperimentConfig& cfg) {
  ExperimentSetup s{TemporalBasis(cfg.bands, cfg.tau), SpatialMesh(cfg.num_elements, cfg.interface), {}, {}, {}};
  const double cp = poincare_constant(s.mesh);
  switch (cfg.problem.kind) {
    case ProblemKind::HeatManufactured: s.nl = builtin_heat(); break;
    case ProblemKind::Adr: s.nl = builtin_adr(cfg.problem.adr_a, cfg.problem.adr_b, cfg.problem.adr_c, cp); break;
    case ProblemKind::Quasilinear: s.nl = builtin_quasilinear(cfg.problem.gamma, cp); break;
  }
  if (cfg.problem.source == SourceKind::Manufactured) {
    ManufacturedProblem mp = manufactured_problem();
    s.f = mp.f;
    if (cfg.problem.kind == ProblemKind::HeatManufactured) s.exact = std::move(mp);
  } else {
    s.f = bump_source(cfg.problem.amplitude);
  }
  return s;
}

SolverConfig solver_config(const ExperimentConfig& cfg, Method method, double phi, double s) {
  SolverConfig sc;
  sc.method = method;
  sc.phi = phi;
  sc.s = s;
  sc.tol = cfg.tol;
  sc.max_outer = cfg.max_outer;
  sc.inner = cfg.inner;
  return sc;
}

std::optional<InterfaceTrace> initial_guess(const ExperimentConfig& cfg, int dim) {
  if (cfg.initial_guess == InitialGuess::Zero) return std::nullopt;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  InterfaceTrace eta{Eigen::VectorXd(dim)};
  for (int a = 0; a < dim; ++a) eta.coeffs[a] = 0.01 * unit(rng);
  return eta;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, bool concurrent) {
  const ExperimentSetup setup = make_setup(cfg);
  const TransmissionProblem problem(setup.basis, setup.mesh, setup.nl, setup.f, cfg.quad, cfg.inner);
  ExperimentReport report;

  const SpaceTimeField mono = problem.monolithic_solve();
  report.monolithic_trace = problem.interface_trace(mono);
  ErrorFunctionalEvaluator eval(setup.basis, setup.mesh, cfg.error_time_points);
  if (setup.exact) {
    eval.set_exact(setup.exact->u, setup.exact->u_x);
  } else {
    eval.set_discrete(mono);
  }
  report.monolithic_ee = eval(problem.restrict_to(Region::Sub1, mono), problem.restrict_to(Region::Sub2, mono));

  const ErrorFunctional error = [&eval](const SpaceTimeField& u1, const SpaceTimeField& u2) { return eval(u1, u2); };
  const auto eta0 = initial_guess(cfg, setup.basis.dim());
  for (const MethodSpec& m : cfg.methods) {
    SolverConfig sc = solver_config(cfg, m.method, m.phi, m.s);
    sc.concurrent = concurrent;
    MethodOutcome outcome{m, {}, std::nullopt, 0.0};
    try {
      outcome.result = dd_run(problem, sc, eta0, error);
    } catch (const Error& e) {
      throw Error(e.kind(), m.label + ": " + e.what());
    }
    const auto& ee = outcome.result.trace.e_e;
    outcome.plateau = plateau_index(ee);
    if (outcome.plateau) {
      outcome.plateau_ee = ee[static_cast<std::size_t>(*outcome.plateau - 1)];
    } else if (!ee.empty()) {
      outcome.plateau_ee = ee.back();
    }
    report.methods.push_back(std::move(outcome));
  }
  return report;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int threads) {
  std::vector<SweepRow> rows;
  for (const SweepSpec& g : cfg.sweeps) {
    const std::vector<double> phis = g.method == Method::RR ? std::vector<double>{0.0} : g.phi;
    for (double phi : phis) {
      for (double s : g.s) rows.push_back({g.method, phi, s, false, false, 0, std::nullopt});
    }
  }
  if (rows.empty()) return rows;

  const ExperimentSetup setup = make_setup(cfg);
  const TransmissionProblem problem(setup.basis, setup.mesh, setup.nl, setup.f, cfg.quad, cfg.inner);
  const auto eta0 = initial_guess(cfg, setup.basis.dim());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      try {
        SolverConfig sc = solver_config(cfg, row.method, row.phi, row.s);
        sc.concurrent = false;
        const DDResult r = dd_run(problem, sc, eta0);
        row.converged = r.trace.converged;
        row.diverged = r.trace.diverged;
        row.iterations = static_cast<int>(r.trace.size());
        row.fitted_L = r.trace.fitted_L;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InnerDivergence) {
          row.diverged = true;
        } else {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace stdd::bench
