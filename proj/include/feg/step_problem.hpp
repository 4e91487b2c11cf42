#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "feg/model.hpp"

namespace feg {

/// The per-(step, state) gating problem in composite-score form.
///
/// With m = prim_matrix * w, the free energy of the step splits as
///   J(w) = sum_u m(u) (ln(m(u)/rho(u)) + d(u)),
/// where d(u) folds everything that does not depend on w:
///   d(u) = KL(p(.|u,x) || q(.|u,x)) + c_u(u) + sum_x' p(x'|u,x) (c_x(x') + l_next(x')).
/// The split is the KL chain rule applied to the joint over (x', u); tests
/// assert it against the direct double sum.
struct StepProblem {
  Eigen::MatrixXd prim_matrix;   // |U| x n_pi, full-support pmf columns
  Eigen::VectorXd ref_policy;    // rho(u|x)
  Eigen::VectorXd action_score;  // d(u), finite
  int state = 0;                 // provenance, for diagnostics
  int step = 1;

  int n_actions() const { return static_cast<int>(ref_policy.size()); }
  int n_primitives() const { return static_cast<int>(prim_matrix.cols()); }
};

/// Raised when some d(u) is infinite: the feasibility screening of the model
/// failed for this (k, x, u).
struct InfeasibleStepError : std::runtime_error {
  InfeasibleStepError(int k, int x, int u);
  int step, state, action;
};

/// Assembles StepProblems from the model, caching the w-independent pieces
/// (per-row plant KL, expected immediate state cost) when the model is
/// stationary. Holds references: the model objects must outlive the factory.
class StepProblemFactory {
 public:
  StepProblemFactory(const EnvironmentKernel& env, const GenerativeModel& gen,
                     const CostModel& costs, const PrimitiveSet& prims,
                     bool parallel_cache = true);

  /// Exact-recursion step problem: continuation is the value vector l_{k+1}.
  StepProblem make(int x, int k, const Eigen::VectorXd& next_value) const;

  /// Receding-horizon step problem: continuation is a per-action heuristic
  /// row h(x, .) used in place of the expected l_{k+1}.
  StepProblem make_greedy(int x, int k, const Eigen::VectorXd& lookahead_row) const;

  const EnvironmentKernel& env() const { return *env_; }
  const GenerativeModel& gen() const { return *gen_; }
  const CostModel& costs() const { return *costs_; }
  const PrimitiveSet& prims() const { return *prims_; }

  /// KL(p(.|u,x) || q(.|u,x)) for step k.
  double kernel_kl(int k, int x, int u) const;
  /// sum_x' p(x'|u,x) c_x_k(x').
  double expected_state_cost(int k, int x, int u) const;

 private:
  StepProblem assemble(int x, int k, const Eigen::VectorXd& d) const;

  const EnvironmentKernel* env_;
  const GenerativeModel* gen_;
  const CostModel* costs_;
  const PrimitiveSet* prims_;
  bool stationary_cache_ = false;
  Eigen::MatrixXd kl_cache_;        // n_states x n_actions
  Eigen::MatrixXd imm_cost_cache_;  // n_states x n_actions
};

/// Convenience one-shot form of StepProblemFactory::make.
StepProblem build_step_problem(const EnvironmentKernel& env, const GenerativeModel& gen,
                               const CostModel& costs, const PrimitiveSet& prims, int x, int k,
                               const Eigen::VectorXd& next_value);

/// J(w) = sum_u m(u) (ln(m(u)/rho(u)) + d(u)) with m = prim_matrix * w.
double objective(const StepProblem& sp, const Weights& w);

/// g_i = sum_u Pi(u,i) (ln(m(u)/rho(u)) + d(u) + 1).
Eigen::VectorXd gradient(const StepProblem& sp, const Weights& w);

/// h_ij = sum_u Pi(u,i) Pi(u,j) / m(u); symmetric positive semi-definite,
/// positive definite when the primitive columns are linearly independent.
Eigen::MatrixXd hessian(const StepProblem& sp, const Weights& w);

namespace detail {
// Unvalidated-weight versions used by the solver's inner loop.
double objective_raw(const StepProblem& sp, const Eigen::VectorXd& w);
Eigen::VectorXd gradient_raw(const StepProblem& sp, const Eigen::VectorXd& w);
}  // namespace detail

}  // namespace feg
