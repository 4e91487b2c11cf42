#include "feg/oracle_checks.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace feg {

namespace {

Eigen::VectorXd random_pmf(RngStream& rng, int n, double base) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = base + rng.uniform01();
  return v / v.sum();
}

int rank_of(const Eigen::MatrixXd& m) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

}  // namespace

StepProblem random_step_problem(RngStream& rng, int max_actions, int max_prims) {
  const int nu = 4 + static_cast<int>(rng.uniform01() * (max_actions - 3));
  const int np = 2 + static_cast<int>(rng.uniform01() * (max_prims - 1));
  StepProblem sp;
  sp.prim_matrix.resize(nu, np);
  for (int i = 0; i < np; ++i) sp.prim_matrix.col(i) = random_pmf(rng, nu, 0.2);
  sp.ref_policy = random_pmf(rng, nu, 0.2);
  sp.action_score.resize(nu);
  for (int u = 0; u < nu; ++u) sp.action_score[u] = 1.5 * rng.uniform01();
  return sp;
}

Weights random_interior_weights(RngStream& rng, int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.1 + rng.uniform01();
  return Weights(w / w.sum());
}

TinyInstance random_tiny_instance(RngStream& rng, int n_states, int n_actions, int n_prims) {
  Grid state_grid({{0.0, 1.0, n_states}, {0.0, 1.0, 1}});
  Grid action_grid({{0.0, 1.0, n_actions}});

  EnvironmentKernel::Table env_rows, ref_rows;
  for (int x = 0; x < n_states; ++x) {
    for (int u = 0; u < n_actions; ++u) {
      env_rows.push_back(FiniteDistribution::from_weights(state_grid,
                                                          random_pmf(rng, n_states, 0.15), 1e-12));
      ref_rows.push_back(FiniteDistribution::from_weights(state_grid,
                                                          random_pmf(rng, n_states, 0.15), 1e-12));
    }
  }
  std::vector<FiniteDistribution> rho;
  for (int x = 0; x < n_states; ++x)
    rho.push_back(FiniteDistribution::from_weights(action_grid, random_pmf(rng, n_actions, 0.2),
                                                   1e-12));
  std::vector<std::vector<FiniteDistribution>> prims(n_prims);
  for (int i = 0; i < n_prims; ++i)
    for (int x = 0; x < n_states; ++x)
      prims[i].push_back(FiniteDistribution::from_weights(action_grid,
                                                          random_pmf(rng, n_actions, 0.2), 1e-12));
  Eigen::VectorXd cx(n_states), cu(n_actions);
  for (int x = 0; x < n_states; ++x) cx[x] = 2.0 * rng.uniform01();
  for (int u = 0; u < n_actions; ++u) cu[u] = rng.uniform01();

  auto env = EnvironmentKernel::stationary(state_grid, action_grid, std::move(env_rows));
  auto refk = EnvironmentKernel::stationary(state_grid, action_grid, std::move(ref_rows));
  GenerativeModel gen{std::move(refk), {std::move(rho)},
                      FiniteDistribution::uniform(state_grid)};
  auto costs = CostModel::stationary(std::move(cx), std::move(cu));
  auto prim_set = PrimitiveSet::create(action_grid, {std::move(prims)});
  return TinyInstance{std::move(state_grid), std::move(action_grid), std::move(env),
                      std::move(gen),        std::move(costs),       std::move(prim_set)};
}

EnumerationResult enumerate_recursion(const TinyInstance& inst, int horizon, int lattice_points) {
  if (inst.prims.n_primitives() != 2)
    throw std::invalid_argument("enumerate_recursion: n_pi = 2 only");
  StepProblemFactory factory(inst.env, inst.gen, inst.costs, inst.prims);
  const int nx = inst.env.n_states();
  const double step = 1.0 / (lattice_points - 1);

  Eigen::VectorXd next = Eigen::VectorXd::Zero(nx);
  double bound = 0.0;
  for (int k = horizon; k >= 1; --k) {
    Eigen::VectorXd lk(nx);
    double worst_gap = 0.0;
    for (int x = 0; x < nx; ++x) {
      const StepProblem sp = factory.make(x, k, next);
      double best = std::numeric_limits<double>::infinity();
      Eigen::VectorXd w(2);
      Eigen::VectorXd w_best(2);
      for (int t = 0; t < lattice_points; ++t) {
        w[0] = static_cast<double>(t) * step;
        w[1] = 1.0 - w[0];
        const double val = detail::objective_raw(sp, w);
        if (val < best) {
          best = val;
          w_best = w;
        }
      }
      lk[x] = best;
      // Curvature of the 1-D section at the lattice argmin bounds how far
      // the lattice minimum can sit above the true one.
      const Eigen::MatrixXd h = hessian(sp, Weights(w_best));
      Eigen::Vector2d dir(1.0, -1.0);
      const double curv = dir.transpose() * h * dir;
      worst_gap = std::max(worst_gap, 0.5 * curv * (0.5 * step) * (0.5 * step));
    }
    bound += worst_gap;
    next = lk;
  }
  return {expectation(inst.gen.initial_prior, next), bound};
}

std::string serialize_step_problem(const StepProblem& sp) {
  nlohmann::json j;
  j["n_actions"] = sp.n_actions();
  j["n_primitives"] = sp.n_primitives();
  j["state"] = sp.state;
  j["step"] = sp.step;
  std::vector<std::vector<double>> pm(sp.n_actions(), std::vector<double>(sp.n_primitives()));
  for (int u = 0; u < sp.n_actions(); ++u)
    for (int i = 0; i < sp.n_primitives(); ++i) pm[u][i] = sp.prim_matrix(u, i);
  j["prim_matrix"] = pm;
  j["ref_policy"] = std::vector<double>(sp.ref_policy.data(), sp.ref_policy.data() + sp.n_actions());
  j["action_score"] =
      std::vector<double>(sp.action_score.data(), sp.action_score.data() + sp.n_actions());
  return j.dump(2);
}

namespace {

OracleSuiteResult run_gradient_suite(std::uint64_t seed) {
  OracleSuiteResult res;
  res.suite = "gradient";
  RngStream rng(seed, 101);
  const double h = 1e-6;
  for (int c = 0; c < 100; ++c) {
    const StepProblem sp = random_step_problem(rng);
    const Weights w = random_interior_weights(rng, sp.n_primitives());
    const Eigen::VectorXd g = gradient(sp, w);
    double worst = 0.0;
    // all simplex-tangent coordinate pairs
    for (int i = 0; i < sp.n_primitives(); ++i) {
      for (int j = i + 1; j < sp.n_primitives(); ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(sp.n_primitives());
        v[i] = 1.0;
        v[j] = -1.0;
        const double fd = (detail::objective_raw(sp, w.vec() + h * v) -
                           detail::objective_raw(sp, w.vec() - h * v)) /
                          (2.0 * h);
        const double an = g.dot(v);
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-9});
        worst = std::max(worst, rel);
      }
    }
    OracleCase oc;
    oc.pass = worst <= 1e-6;
    oc.margin = 1e-6 - worst;
    std::ostringstream os;
    os << "case " << c << ": max fd rel err " << worst;
    oc.detail = os.str();
    res.cases.push_back(oc);
    if (!oc.pass) {
      res.pass = false;
      if (!res.failing_instance) res.failing_instance = serialize_step_problem(sp);
    }
  }
  return res;
}

OracleSuiteResult run_convexity_suite(std::uint64_t seed) {
  OracleSuiteResult res;
  res.suite = "convexity";
  RngStream rng(seed, 202);
  for (int c = 0; c < 100; ++c) {
    const StepProblem sp = random_step_problem(rng);
    const int n = sp.n_primitives();
    const Weights w = random_interior_weights(rng, n);
    const Eigen::MatrixXd h = hessian(sp, w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const double min_eig = eig.eigenvalues().minCoeff();

    OracleCase oc;
    double margin = min_eig + 1e-10;  // PSD within tolerance
    bool pass = min_eig >= -1e-10;
    if (rank_of(sp.prim_matrix) == n) {
      const double strict = 1e-12 * h.trace() / n;
      pass = pass && min_eig > strict;
      margin = std::min(margin, min_eig - strict);
    }
    // midpoint convexity on random triples
    double worst_violation = -1e300;
    for (int t = 0; t < 100; ++t) {
      const Weights w1 = random_interior_weights(rng, n);
      const Weights w2 = random_interior_weights(rng, n);
      const double a = rng.uniform01();
      const Eigen::VectorXd wm = a * w1.vec() + (1.0 - a) * w2.vec();
      const double lhs = detail::objective_raw(sp, wm);
      const double rhs = a * detail::objective_raw(sp, w1.vec()) +
                         (1.0 - a) * detail::objective_raw(sp, w2.vec());
      worst_violation = std::max(worst_violation, lhs - rhs);
    }
    pass = pass && worst_violation <= 1e-10;
    margin = std::min(margin, 1e-10 - worst_violation);

    oc.pass = pass;
    oc.margin = margin;
    std::ostringstream os;
    os << "case " << c << ": min eig " << min_eig << ", worst midpoint violation "
       << worst_violation;
    oc.detail = os.str();
    res.cases.push_back(oc);
    if (!pass) {
      res.pass = false;
      if (!res.failing_instance) res.failing_instance = serialize_step_problem(sp);
    }
  }
  return res;
}

OracleSuiteResult run_recursion_suite(std::uint64_t seed) {
  OracleSuiteResult res;
  res.suite = "recursion";
  RngStream rng(seed, 303);
  for (int c = 0; c < 5; ++c) {
    const TinyInstance inst = random_tiny_instance(rng);
    const Plan plan = backward_recursion(inst.env, inst.gen, inst.costs, inst.prims, 2);
    const double exact = plan.total_free_energy(inst.gen.initial_prior);
    const EnumerationResult en = enumerate_recursion(inst, 2, 101);

    // The lattice optimum can only sit above the true one, by at most the
    // resolution bound.
    const double low = en.total_free_energy - en.resolution_bound - 1e-6;
    const double high = en.total_free_energy + 1e-6;
    OracleCase oc;
    oc.pass = exact >= low && exact <= high;
    oc.margin = std::min(exact - low, high - exact);
    std::ostringstream os;
    os << "case " << c << ": recursion " << exact << ", lattice " << en.total_free_energy
       << ", bound " << en.resolution_bound;
    oc.detail = os.str();
    res.cases.push_back(oc);
    if (!oc.pass) res.pass = false;
  }
  return res;
}

OracleSuiteResult run_transcendence_suite(std::uint64_t seed) {
  OracleSuiteResult res;
  res.suite = "transcendence";
  RngStream rng(seed, 404);
  int qualifying = 0;
  for (int c = 0; c < 200; ++c) {
    const StepProblem sp = random_step_problem(rng);
    const int n = sp.n_primitives();
    const SolveReport rep = solve(sp);
    if (!rep.converged) {
      OracleCase oc;
      oc.pass = false;
      oc.margin = -rep.fw_gap;
      oc.detail = "solver did not converge";
      res.cases.push_back(oc);
      res.pass = false;
      continue;
    }
    int positive = 0;
    for (int i = 0; i < n; ++i)
      if (rep.weights[i] > 1e-6) ++positive;
    if (positive < 2 || rank_of(sp.prim_matrix) != n) continue;
    ++qualifying;

    double min_vertex = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      min_vertex = std::min(min_vertex, objective(sp, Weights::basis(n, i)));
    OracleCase oc;
    const double margin = min_vertex - 1e-9 - rep.objective;
    oc.pass = margin > 0.0;
    oc.margin = margin;
    std::ostringstream os;
    os << "case " << c << ": J(w*) " << rep.objective << " vs best vertex " << min_vertex;
    oc.detail = os.str();
    res.cases.push_back(oc);
    if (!oc.pass) {
      res.pass = false;
      if (!res.failing_instance) res.failing_instance = serialize_step_problem(sp);
    }
  }
  if (qualifying < 20) {
    OracleCase oc;
    oc.pass = false;
    oc.margin = qualifying - 20.0;
    oc.detail = "fewer than 20 instances with interior optima";
    res.cases.push_back(oc);
    res.pass = false;
  }
  return res;
}

}  // namespace

OracleSuiteResult run_oracle_suite(const std::string& suite, std::uint64_t seed) {
  if (suite == "gradient") return run_gradient_suite(seed);
  if (suite == "convexity") return run_convexity_suite(seed);
  if (suite == "recursion") return run_recursion_suite(seed);
  if (suite == "transcendence") return run_transcendence_suite(seed);
  throw std::invalid_argument("run_oracle_suite: unknown suite '" + suite + "'");
}

}  // namespace feg
