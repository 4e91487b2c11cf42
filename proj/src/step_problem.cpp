#include "feg/step_problem.hpp"

#include <cmath>
#include <sstream>

namespace feg {

namespace {

std::string infeasible_msg(int k, int x, int u) {
  std::ostringstream os;
  os << "infeasible step problem: d(u) is infinite at (k=" << k << ", x=" << x << ", u=" << u
     << "); the plant KL diverges there";
  return os.str();
}

}  // namespace

InfeasibleStepError::InfeasibleStepError(int k, int x, int u)
    : std::runtime_error(infeasible_msg(k, x, u)), step(k), state(x), action(u) {}

StepProblemFactory::StepProblemFactory(const EnvironmentKernel& env, const GenerativeModel& gen,
                                       const CostModel& costs, const PrimitiveSet& prims,
                                       bool parallel_cache)
    : env_(&env), gen_(&gen), costs_(&costs), prims_(&prims) {
  if (env.state_grid_id() != gen.ref_kernel.state_grid_id() ||
      env.action_grid_id() != gen.ref_kernel.action_grid_id())
    throw std::invalid_argument("StepProblemFactory: env/reference grid mismatch");
  if (prims.n_actions() != env.n_actions() || prims.n_states() != env.n_states())
    throw std::invalid_argument("StepProblemFactory: primitive table does not match grids");

  stationary_cache_ = env.is_stationary() && gen.ref_kernel.is_stationary();
  if (stationary_cache_) {
    const int nx = env.n_states(), nu = env.n_actions();
    kl_cache_.resize(nx, nu);
    imm_cost_cache_.resize(nx, nu);
    const Eigen::VectorXd& cx = costs.state_cost(1);
    const bool stationary_cost = &costs.state_cost(1) == &costs.state_cost(2);
    if (!stationary_cost) imm_cost_cache_.resize(0, 0);
#pragma omp parallel for schedule(static) if (parallel_cache)
    for (int x = 0; x < nx; ++x) {
      for (int u = 0; u < nu; ++u) {
        kl_cache_(x, u) = kl_divergence(env.row(1, x, u), gen.ref_kernel.row(1, x, u));
        if (stationary_cost) imm_cost_cache_(x, u) = env.row(1, x, u).probs().dot(cx);
      }
    }
  }
}

double StepProblemFactory::kernel_kl(int k, int x, int u) const {
  if (stationary_cache_) return kl_cache_(x, u);
  return kl_divergence(env_->row(k, x, u), gen_->ref_kernel.row(k, x, u));
}

double StepProblemFactory::expected_state_cost(int k, int x, int u) const {
  if (imm_cost_cache_.size() > 0 && stationary_cache_) return imm_cost_cache_(x, u);
  return env_->row(k, x, u).probs().dot(costs_->state_cost(k));
}

StepProblem StepProblemFactory::assemble(int x, int k, const Eigen::VectorXd& d) const {
  for (int u = 0; u < d.size(); ++u)
    if (!std::isfinite(d[u])) throw InfeasibleStepError(k, x, u);
  StepProblem sp;
  sp.prim_matrix = prims_->matrix(k, x);
  sp.ref_policy = gen_->policy_row(k, x).probs();
  sp.action_score = d;
  sp.state = x;
  sp.step = k;
  return sp;
}

StepProblem StepProblemFactory::make(int x, int k, const Eigen::VectorXd& next_value) const {
  if (next_value.size() != env_->n_states())
    throw std::invalid_argument("StepProblemFactory::make: next_value length mismatch");
  if (!next_value.allFinite())
    throw std::invalid_argument("StepProblemFactory::make: next_value must be finite");
  const int nu = env_->n_actions();
  const Eigen::VectorXd& cu = costs_->action_cost(k);
  Eigen::VectorXd d(nu);
  for (int u = 0; u < nu; ++u)
    d[u] = kernel_kl(k, x, u) + cu[u] + expected_state_cost(k, x, u) +
           env_->row(k, x, u).probs().dot(next_value);
  return assemble(x, k, d);
}

StepProblem StepProblemFactory::make_greedy(int x, int k,
                                            const Eigen::VectorXd& lookahead_row) const {
  const int nu = env_->n_actions();
  if (lookahead_row.size() != nu)
    throw std::invalid_argument("StepProblemFactory::make_greedy: lookahead length mismatch");
  const Eigen::VectorXd& cu = costs_->action_cost(k);
  Eigen::VectorXd d(nu);
  for (int u = 0; u < nu; ++u)
    d[u] = kernel_kl(k, x, u) + cu[u] + expected_state_cost(k, x, u) + lookahead_row[u];
  return assemble(x, k, d);
}

StepProblem build_step_problem(const EnvironmentKernel& env, const GenerativeModel& gen,
                               const CostModel& costs, const PrimitiveSet& prims, int x, int k,
                               const Eigen::VectorXd& next_value) {
  return StepProblemFactory(env, gen, costs, prims).make(x, k, next_value);
}

namespace detail {

double objective_raw(const StepProblem& sp, const Eigen::VectorXd& w) {
  const Eigen::VectorXd m = sp.prim_matrix * w;
  double acc = 0.0;
  for (int u = 0; u < m.size(); ++u)
    acc += m[u] * (std::log(m[u] / sp.ref_policy[u]) + sp.action_score[u]);
  return acc;
}

Eigen::VectorXd gradient_raw(const StepProblem& sp, const Eigen::VectorXd& w) {
  const Eigen::VectorXd m = sp.prim_matrix * w;
  Eigen::VectorXd t(m.size());
  for (int u = 0; u < m.size(); ++u)
    t[u] = std::log(m[u] / sp.ref_policy[u]) + sp.action_score[u] + 1.0;
  return sp.prim_matrix.transpose() * t;
}

}  // namespace detail

double objective(const StepProblem& sp, const Weights& w) {
  if (w.size() != sp.n_primitives()) throw std::invalid_argument("objective: weight size mismatch");
  return detail::objective_raw(sp, w.vec());
}

Eigen::VectorXd gradient(const StepProblem& sp, const Weights& w) {
  if (w.size() != sp.n_primitives()) throw std::invalid_argument("gradient: weight size mismatch");
  return detail::gradient_raw(sp, w.vec());
}

Eigen::MatrixXd hessian(const StepProblem& sp, const Weights& w) {
  if (w.size() != sp.n_primitives()) throw std::invalid_argument("hessian: weight size mismatch");
  const Eigen::VectorXd m = sp.prim_matrix * w.vec();
  const int n = sp.n_primitives();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < m.size(); ++u) {
    const Eigen::RowVectorXd row = sp.prim_matrix.row(u);
    h += (row.transpose() * row) / m[u];
  }
  return h;
}

}  // namespace feg
