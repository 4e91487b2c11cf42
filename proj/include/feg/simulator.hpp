#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "feg/planner.hpp"
#include "feg/rng.hpp"

namespace feg {

/// What drives the state between steps.
///
/// Kernel: the next state index is sampled from the environment kernel row
/// (the state lives on the grid and performs the kernel's random walk).
/// Integrator: the position evolves continuously as x + u*dt, clipped to the
/// workspace; the controller sees the nearest-bin state and the stop rule is
/// evaluated on the true position. The kernel then only enters through the
/// gating model. This is the mode the navigation experiment runs in.
enum class PlantMode { Kernel, Integrator };

struct RolloutConfig {
  // Start: a state index, a continuous position (integrator), or a prior to
  // sample the initial state from. Exactly one must be set.
  std::optional<int> initial_state;
  std::optional<Eigen::Vector2d> initial_position;
  std::optional<FiniteDistribution> initial_prior;

  int max_steps = 3000;
  double goal_radius = 0.08;     // meters
  double idle_duration = 2.0;    // seconds within the radius before stopping
  double dt = 0.033;             // seconds per step
  std::uint64_t seed = 1;
  std::uint32_t stream_id = 0;
  PlantMode plant = PlantMode::Integrator;
  Eigen::Vector2d goal{0.0, 0.0};

  int idle_steps() const;  // ceil(idle_duration / dt), at least 1
};

enum class TerminalStatus { GoalReached, MaxSteps, Error };

struct StepRecord {
  int state;                 // controller's (measured) state index
  int action;                // sampled action index
  Eigen::VectorXd weights;   // gating weights used this step
  double policy_entropy;     // entropy of the mixed policy, nats
  double objective;          // instantaneous free energy at the optimum
  double state_cost;         // c_x at the current state
  Eigen::Vector2d position;  // true position at the start of the step
  Eigen::Vector2d velocity;  // applied action (bin center)
};

struct TrajectoryRecord {
  std::vector<StepRecord> steps;
  TerminalStatus status = TerminalStatus::MaxSteps;
  int step_count = 0;
  std::string error;
};

/// Per-step control decision at a measured state; k is the 1-based step.
struct Controller {
  virtual ~Controller() = default;
  virtual GreedyDecision decide(int state, int k) = 0;
};

/// Receding-horizon gating: one step-problem solve per tick.
class GreedyController : public Controller {
 public:
  GreedyController(const StepProblemFactory& factory, const Eigen::MatrixXd& lookahead,
                   SolveOptions opts = {});
  GreedyDecision decide(int state, int k) override;

 private:
  const StepProblemFactory* factory_;
  const Eigen::MatrixXd* lookahead_;
  SolveOptions opts_;
};

/// A single primitive applied as-is (no gating).
class FixedPrimitiveController : public Controller {
 public:
  FixedPrimitiveController(const StepProblemFactory& factory, const Eigen::MatrixXd& lookahead,
                           int primitive);
  GreedyDecision decide(int state, int k) override;

 private:
  const StepProblemFactory* factory_;
  const Eigen::MatrixXd* lookahead_;
  int primitive_;
};

/// Replays a precomputed Plan; steps beyond the horizon reuse the last one.
class PlanController : public Controller {
 public:
  PlanController(const Plan& plan, const StepProblemFactory& factory);
  GreedyDecision decide(int state, int k) override;

 private:
  const Plan* plan_;
  const StepProblemFactory* factory_;
};

/// Closed-loop rollout. Controller failures terminate the episode with
/// TerminalStatus::Error and a partial record.
TrajectoryRecord rollout(const Grid& state_grid, const Grid& action_grid,
                         const EnvironmentKernel& env, const CostModel& costs,
                         Controller& controller, const RolloutConfig& cfg);

/// One rollout per start, stream ids assigned by position in the list.
/// Serial and parallel execution produce identical records.
using Start = std::variant<int, Eigen::Vector2d>;
std::vector<TrajectoryRecord> batch_rollouts(const Grid& state_grid, const Grid& action_grid,
                                             const EnvironmentKernel& env, const CostModel& costs,
                                             const std::function<std::unique_ptr<Controller>()>&
                                                 make_controller,
                                             const std::vector<Start>& starts,
                                             const RolloutConfig& cfg_template,
                                             Exec exec = Exec::Parallel);

}  // namespace feg
