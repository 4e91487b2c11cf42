#pragma once

#include <Eigen/Core>
#include <vector>

#include "feg/simulator.hpp"

namespace feg {

/// Configuration of the planar goal-reaching scenario: a rectangular
/// workspace with Gaussian integrator dynamics, four cardinal velocity
/// primitives, a goal-seeking reference policy, and Gaussian obstacle and
/// wall penalties.
struct NavScenarioConfig {
  // workspace and velocity box, meters / meters per second
  double x_min = -1.6, x_max = 1.6;
  double y_min = -1.0, y_max = 1.0;
  double u_min = -0.2, u_max = 0.2;
  int state_bins_x = 33, state_bins_y = 21;
  int action_bins = 7;  // per velocity axis

  double dt = 0.033;

  // covariances (isotropic, variance per axis)
  double process_var = 0.008;      // plant model p(x'|u,x)
  double ref_process_var = 0.002;  // reference kernel q(x'|u,x)
  double primitive_var = 0.005;    // primitive action spread
  double ref_policy_var = 0.005;   // reference policy spread

  Eigen::Vector2d goal{-1.3, 0.0};
  std::vector<Eigen::Vector2d> obstacles{{0.0, 0.5}, {-0.8, -0.1}, {0.5, -0.3}};

  double obstacle_gain = 150.0;  // peak cost per obstacle (unit-height Gaussians)
  double wall_gain = 30.0;       // peak cost per wall
  double obstacle_width = 0.15;  // meters
  double wall_width = 0.08;      // meters

  double primitive_gain = 0.3;  // 1/s, velocity proportional to boundary distance
  double reference_gain = 0.3;  // 1/s, velocity proportional to goal distance

  double support_floor = 1e-12;

  void validate() const;  // throws on inconsistencies
};

/// The assembled scenario. All members are immutable after construction and
/// share grids by value.
struct NavScenario {
  NavScenarioConfig cfg;
  Grid state_grid;
  Grid action_grid;
  EnvironmentKernel env;
  GenerativeModel gen;
  CostModel costs;
  PrimitiveSet prims;
  Eigen::MatrixXd lookahead;  // n_states x n_actions heuristic cost-to-go

  /// Factory with the KL and immediate-cost caches built; shared by the
  /// greedy controller and the planner.
  StepProblemFactory make_factory() const { return {env, gen, costs, prims}; }
};

/// Pre-clipping mean velocity of primitive i (0 right, 1 left, 2 up, 3 down)
/// at a workspace position.
Eigen::Vector2d primitive_mean(const NavScenarioConfig& cfg, int primitive,
                               const Eigen::Vector2d& pos);

/// Obstacle and wall penalty terms at a position (before summing).
struct StateCostTerms {
  std::vector<double> obstacle;  // one per obstacle, peak = obstacle_gain
  std::vector<double> wall;      // one per workspace edge, peak = wall_gain
  double total() const;
};
StateCostTerms state_cost_terms(const NavScenarioConfig& cfg, const Eigen::Vector2d& pos);

/// c_x at a position: obstacle_gain * sum_j g_j + wall_gain * sum_j w_j.
double state_cost(const NavScenarioConfig& cfg, const Eigen::Vector2d& pos);

/// Builds kernels, reference model, costs, primitives, and the heuristic
/// lookahead table. Parallelized over states; serial gives identical output.
NavScenario build_scenario(const NavScenarioConfig& cfg, Exec exec = Exec::Parallel);

}  // namespace feg
