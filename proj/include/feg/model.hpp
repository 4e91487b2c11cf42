#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "feg/distribution.hpp"
#include "feg/grid.hpp"

namespace feg {

namespace detail {
// Per-step table lookup: a single table is shared across all steps, and
// steps beyond the stored horizon reuse the last table.
inline std::size_t step_index(std::size_t n_tables, int k) {
  if (n_tables == 1) return 0;
  const std::size_t i = static_cast<std::size_t>(k > 0 ? k - 1 : 0);
  return i < n_tables ? i : n_tables - 1;
}
}  // namespace detail

/// Simplex point gating the primitives: entries >= 0, sum 1 within 1e-10.
class Weights {
 public:
  explicit Weights(Eigen::VectorXd w);
  static Weights barycenter(int n);
  static Weights basis(int n, int i);

  const Eigen::VectorXd& vec() const { return w_; }
  double operator[](int i) const { return w_[i]; }
  int size() const { return static_cast<int>(w_.size()); }

 private:
  Eigen::VectorXd w_;
};

/// Conditional next-state tables p(x'|u,x). One table per time step when
/// non-stationary, a single shared table otherwise. Steps are 1-based.
class EnvironmentKernel {
 public:
  using Table = std::vector<FiniteDistribution>;  // indexed x * n_actions + u

  static EnvironmentKernel stationary(const Grid& state_grid, const Grid& action_grid,
                                      Table table);
  static EnvironmentKernel time_varying(const Grid& state_grid, const Grid& action_grid,
                                        std::vector<Table> tables);

  const FiniteDistribution& row(int k, int x, int u) const;
  bool is_stationary() const { return tables_.size() == 1; }
  int steps() const { return static_cast<int>(tables_.size()); }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  std::uint64_t state_grid_id() const { return state_grid_id_; }
  std::uint64_t action_grid_id() const { return action_grid_id_; }

 private:
  EnvironmentKernel() = default;
  std::vector<Table> tables_;
  int n_states_ = 0, n_actions_ = 0;
  std::uint64_t state_grid_id_ = 0, action_grid_id_ = 0;
};

/// Reference model: kernel q(x'|u,x), per-state reference policy rho(u|x),
/// and the initial state prior q(x0).
struct GenerativeModel {
  EnvironmentKernel ref_kernel;
  std::vector<std::vector<FiniteDistribution>> ref_policy;  // [k][x], size-1 outer = stationary
  FiniteDistribution initial_prior;

  const FiniteDistribution& policy_row(int k, int x) const {
    return ref_policy[detail::step_index(ref_policy.size(), k)][x];
  }
};

/// Per-step state and action costs; all entries must be finite.
class CostModel {
 public:
  static CostModel stationary(Eigen::VectorXd state_cost, Eigen::VectorXd action_cost);
  static CostModel time_varying(std::vector<Eigen::VectorXd> state_costs,
                                std::vector<Eigen::VectorXd> action_costs);

  const Eigen::VectorXd& state_cost(int k) const {
    return state_costs_[detail::step_index(state_costs_.size(), k)];
  }
  const Eigen::VectorXd& action_cost(int k) const {
    return action_costs_[detail::step_index(action_costs_.size(), k)];
  }

 private:
  CostModel() = default;
  std::vector<Eigen::VectorXd> state_costs_, action_costs_;
};

/// The primitive policies pi^(i)(u|x): full-support action pmfs per state,
/// one family per time step when non-stationary.
class PrimitiveSet {
 public:
  // tables[k][i][x]; a single outer entry means stationary primitives.
  static PrimitiveSet create(const Grid& action_grid,
                             std::vector<std::vector<std::vector<FiniteDistribution>>> tables);

  int n_primitives() const { return n_prims_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  const FiniteDistribution& primitive(int k, int i, int x) const {
    return tables_[detail::step_index(tables_.size(), k)][i][x];
  }
  std::uint64_t action_grid_id() const { return action_grid_id_; }

  /// |U| x n_pi matrix of primitive columns at state x, step k.
  Eigen::MatrixXd matrix(int k, int x) const;

 private:
  PrimitiveSet() = default;
  std::vector<std::vector<std::vector<FiniteDistribution>>> tables_;
  int n_prims_ = 0, n_states_ = 0, n_actions_ = 0;
  std::uint64_t action_grid_id_ = 0;
};

/// Pointwise convex combination sum_i w_i pi^(i)(.|x) at step k.
FiniteDistribution mix_policy(const PrimitiveSet& prims, int k, int x, const Weights& w);

struct FeasibilityReport {
  bool feasible = true;
  // Human-readable description of each absolute-continuity violation.
  std::vector<std::string> violations;
  // Entries where the reference only dominates thanks to its support floor.
  int floor_rescued_kernel = 0;
  int floor_rescued_policy = 0;
  std::string summary() const;
};

/// Absolute-continuity screening: every env row w.r.t. the matching
/// reference row, every primitive w.r.t. the reference policy.
FeasibilityReport check_feasibility(const EnvironmentKernel& env, const GenerativeModel& gen,
                                    const PrimitiveSet& prims);

}  // namespace feg
