#include "feg/planner.hpp"

#include <omp.h>

#include <sstream>
#include <stdexcept>

namespace feg {

ValueTable::ValueTable(int horizon, int n_states) {
  if (horizon < 1) throw std::invalid_argument("ValueTable: horizon must be >= 1");
  values_.assign(horizon + 1, Eigen::VectorXd::Zero(n_states));
}

PolicyTable::PolicyTable(int horizon, int n_states, int n_prims)
    : table_(horizon, std::vector<Weights>(n_states, Weights::barycenter(n_prims))) {}

FiniteDistribution PolicyTable::mixed(const PrimitiveSet& prims, int k, int x) const {
  return mix_policy(prims, k, x, at(k, x));
}

double Plan::total_free_energy(const FiniteDistribution& initial_prior) const {
  return expectation(initial_prior, values.at(1));
}

Plan backward_recursion(const EnvironmentKernel& env, const GenerativeModel& gen,
                        const CostModel& costs, const PrimitiveSet& prims, int horizon,
                        const SolveOptions& opts, Exec exec) {
  if (horizon < 1) throw std::invalid_argument("backward_recursion: horizon must be >= 1");
  const auto feas = check_feasibility(env, gen, prims);
  if (!feas.feasible)
    throw std::runtime_error("backward_recursion: infeasible model: " + feas.summary());

  const int n_states = env.n_states();
  StepProblemFactory factory(env, gen, costs, prims, exec == Exec::Parallel);
  Plan plan{ValueTable(horizon, n_states), PolicyTable(horizon, n_states, prims.n_primitives()),
            horizon};

  for (int k = horizon; k >= 1; --k) {
    const Eigen::VectorXd& next_value = plan.values.at(k + 1);
    Eigen::VectorXd& lk = plan.values.at(k);
    std::vector<std::string> failures;

    // Per-state solves at a fixed k are independent; each writes its own
    // slot, so thread count does not affect the result.
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::Parallel)
    for (int x = 0; x < n_states; ++x) {
      try {
        const StepProblem sp = factory.make(x, k, next_value);
        SolveReport rep = solve(sp, opts);
        if (!rep.converged) {
          std::ostringstream os;
          os << "(k=" << k << ", x=" << x << ") gap=" << rep.fw_gap;
#pragma omp critical
          failures.push_back(os.str());
        }
        lk[x] = rep.objective;
        plan.policies.set(k, x, std::move(rep.weights));
      } catch (const std::exception& e) {
#pragma omp critical
        failures.push_back(e.what());
      }
    }
    if (!failures.empty()) {
      std::ostringstream os;
      os << "backward_recursion: " << failures.size() << " per-state solve(s) failed at k=" << k
         << ":";
      for (const auto& f : failures) os << "\n  " << f;
      throw std::runtime_error(os.str());
    }
  }
  return plan;
}

double heuristic_cost_to_go(const EnvironmentKernel& env, const CostModel& costs, int x, int u) {
  const Eigen::VectorXd& cx = costs.state_cost(1);
  const auto& first = env.row(1, x, u);
  double acc = 0.0;
  for (int x1 = 0; x1 < first.size(); ++x1) {
    if (first[x1] <= 0.0) continue;
    acc += first[x1] * env.row(1, x1, u).probs().dot(cx);
  }
  return acc;
}

GreedyDecision greedy_step(const StepProblemFactory& factory, int x,
                           const Eigen::VectorXd& lookahead_row, const SolveOptions& opts) {
  const StepProblem sp = factory.make_greedy(x, 1, lookahead_row);
  SolveReport rep = solve(sp, opts);
  if (!rep.converged) {
    std::ostringstream os;
    os << "greedy_step: solver did not converge at x=" << x << " (gap=" << rep.fw_gap << ")";
    throw std::runtime_error(os.str());
  }
  FiniteDistribution pol = mix_policy(factory.prims(), 1, x, rep.weights);
  return GreedyDecision{std::move(rep.weights), std::move(pol), rep.objective, rep.fw_gap};
}

GreedyDecision greedy_step(const EnvironmentKernel& env, const GenerativeModel& gen,
                           const CostModel& costs, const PrimitiveSet& prims, int x,
                           const Eigen::MatrixXd& lookahead, const SolveOptions& opts) {
  StepProblemFactory factory(env, gen, costs, prims);
  return greedy_step(factory, x, lookahead.row(x).transpose(), opts);
}

}  // namespace feg
