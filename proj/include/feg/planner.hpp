#pragma once

#include <Eigen/Core>
#include <vector>

#include "feg/solver.hpp"

namespace feg {

/// Serial runs the reference loop; Parallel fans the same per-state solves
/// out over OpenMP workers. Results are bitwise identical.
enum class Exec { Serial, Parallel };

/// Optimal step values l_k(x) for k = 1..N+1, with l_{N+1} identically 0.
class ValueTable {
 public:
  explicit ValueTable(int horizon, int n_states);
  const Eigen::VectorXd& at(int k) const { return values_.at(k - 1); }
  Eigen::VectorXd& at(int k) { return values_.at(k - 1); }
  int horizon() const { return static_cast<int>(values_.size()) - 1; }

 private:
  std::vector<Eigen::VectorXd> values_;
};

/// Optimal gating weights w*_k(x) for k = 1..N.
class PolicyTable {
 public:
  PolicyTable(int horizon, int n_states, int n_prims);
  const Weights& at(int k, int x) const { return table_.at(k - 1).at(x); }
  void set(int k, int x, Weights w) { table_.at(k - 1).at(x) = std::move(w); }
  int horizon() const { return static_cast<int>(table_.size()); }

  /// The composed policy pi*(u|x) at (k, x).
  FiniteDistribution mixed(const PrimitiveSet& prims, int k, int x) const;

 private:
  std::vector<std::vector<Weights>> table_;
};

struct Plan {
  ValueTable values;
  PolicyTable policies;
  int horizon;

  /// E over the initial prior of l_1: the optimal total free energy.
  double total_free_energy(const FiniteDistribution& initial_prior) const;
};

/// The exact backward recursion: for k = N..1 solve the gating problem at
/// every state with continuation l_{k+1}, recording weights and values.
/// Throws if the model is infeasible or any per-state solve fails to
/// converge (the message lists the offending (k, x) pairs).
Plan backward_recursion(const EnvironmentKernel& env, const GenerativeModel& gen,
                        const CostModel& costs, const PrimitiveSet& prims, int horizon,
                        const SolveOptions& opts = {}, Exec exec = Exec::Parallel);

/// Expected state cost after applying u from x and then re-applying it from
/// the successor: sum_x' p(x'|u,x) sum_x'' p(x''|u,x') c_x(x'').
double heuristic_cost_to_go(const EnvironmentKernel& env, const CostModel& costs, int x, int u);

struct GreedyDecision {
  Weights weights;
  FiniteDistribution policy;
  double objective;   // instantaneous free energy at the optimum
  double fw_gap;
};

/// One receding-horizon solve at state x with a per-action heuristic
/// continuation in place of the exact expected l_{k+1}.
GreedyDecision greedy_step(const StepProblemFactory& factory, int x,
                           const Eigen::VectorXd& lookahead_row, const SolveOptions& opts = {});

/// Convenience overload building the factory on the fly; `lookahead` is the
/// full (state x action) heuristic table.
GreedyDecision greedy_step(const EnvironmentKernel& env, const GenerativeModel& gen,
                           const CostModel& costs, const PrimitiveSet& prims, int x,
                           const Eigen::MatrixXd& lookahead, const SolveOptions& opts = {});

}  // namespace feg
