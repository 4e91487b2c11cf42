#include "feg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <variant>

namespace feg {

int RolloutConfig::idle_steps() const {
  const int n = static_cast<int>(std::ceil(idle_duration / dt));
  return n < 1 ? 1 : n;
}

GreedyController::GreedyController(const StepProblemFactory& factory,
                                   const Eigen::MatrixXd& lookahead, SolveOptions opts)
    : factory_(&factory), lookahead_(&lookahead), opts_(opts) {}

GreedyDecision GreedyController::decide(int state, int /*k*/) {
  return greedy_step(*factory_, state, lookahead_->row(state).transpose(), opts_);
}

FixedPrimitiveController::FixedPrimitiveController(const StepProblemFactory& factory,
                                                   const Eigen::MatrixXd& lookahead, int primitive)
    : factory_(&factory), lookahead_(&lookahead), primitive_(primitive) {
  if (primitive < 0 || primitive >= factory.prims().n_primitives())
    throw std::invalid_argument("FixedPrimitiveController: bad primitive index");
}

GreedyDecision FixedPrimitiveController::decide(int state, int /*k*/) {
  const StepProblem sp = factory_->make_greedy(state, 1, lookahead_->row(state).transpose());
  Weights w = Weights::basis(factory_->prims().n_primitives(), primitive_);
  const double obj = objective(sp, w);
  FiniteDistribution pol = factory_->prims().primitive(1, primitive_, state);
  return GreedyDecision{std::move(w), std::move(pol), obj, 0.0};
}

PlanController::PlanController(const Plan& plan, const StepProblemFactory& factory)
    : plan_(&plan), factory_(&factory) {}

GreedyDecision PlanController::decide(int state, int k) {
  const int kk = k <= plan_->horizon ? k : plan_->horizon;
  const Weights& w = plan_->policies.at(kk, state);
  FiniteDistribution pol = plan_->policies.mixed(factory_->prims(), kk, state);
  const StepProblem sp = factory_->make(state, kk, plan_->values.at(kk + 1));
  const double obj = objective(sp, w);
  return GreedyDecision{w, std::move(pol), obj, 0.0};
}

namespace {

int resolve_initial_state(const Grid& state_grid, const RolloutConfig& cfg, RngStream& rng,
                          Eigen::Vector2d& position) {
  int set = 0;
  set += cfg.initial_state.has_value();
  set += cfg.initial_position.has_value();
  set += cfg.initial_prior.has_value();
  if (set != 1)
    throw std::invalid_argument("rollout: exactly one of initial state/position/prior required");

  int s;
  if (cfg.initial_state) {
    s = *cfg.initial_state;
    if (s < 0 || s >= state_grid.flat_size()) throw std::out_of_range("rollout: bad initial state");
    const auto pt = state_grid.point(s);
    position = Eigen::Vector2d(pt[0], pt[1]);
  } else if (cfg.initial_position) {
    position = *cfg.initial_position;
    const double coords[2] = {position.x(), position.y()};
    s = state_grid.locate(coords);
  } else {
    s = sample(*cfg.initial_prior, rng);
    const auto pt = state_grid.point(s);
    position = Eigen::Vector2d(pt[0], pt[1]);
  }
  return s;
}

}  // namespace

TrajectoryRecord rollout(const Grid& state_grid, const Grid& action_grid,
                         const EnvironmentKernel& env, const CostModel& costs,
                         Controller& controller, const RolloutConfig& cfg) {
  if (cfg.max_steps < 1) throw std::invalid_argument("rollout: max_steps must be >= 1");
  if (!(cfg.goal_radius > 0.0)) throw std::invalid_argument("rollout: goal_radius must be > 0");
  if (state_grid.ndim() != 2) throw std::invalid_argument("rollout: state grid must be 2-D");

  RngStream rng(cfg.seed, cfg.stream_id);
  TrajectoryRecord rec;
  Eigen::Vector2d position;
  // configuration errors propagate; only controller failures poison the record
  int state = resolve_initial_state(state_grid, cfg, rng, position);

  const int idle_needed = cfg.idle_steps();
  int idle = 0;
  const double x_lo = state_grid.axis(0).lo, x_hi = state_grid.axis(0).hi;
  const double y_lo = state_grid.axis(1).lo, y_hi = state_grid.axis(1).hi;

  for (int step = 1; step <= cfg.max_steps; ++step) {
    GreedyDecision dec{Weights::basis(1, 0), FiniteDistribution::uniform(action_grid), 0.0, 0.0};
    try {
      dec = controller.decide(state, step);
    } catch (const std::exception& e) {
      rec.status = TerminalStatus::Error;
      rec.error = e.what();
      rec.step_count = static_cast<int>(rec.steps.size());
      return rec;
    }

    const int action = sample(dec.policy, rng);
    const auto upt = action_grid.point(action);
    const Eigen::Vector2d velocity(upt[0], upt.size() > 1 ? upt[1] : 0.0);

    StepRecord sr;
    sr.state = state;
    sr.action = action;
    sr.weights = dec.weights.vec();
    sr.policy_entropy = entropy(dec.policy);
    sr.objective = dec.objective;
    sr.state_cost = costs.state_cost(step)[state];
    sr.position = position;
    sr.velocity = velocity;
    rec.steps.push_back(std::move(sr));

    if (cfg.plant == PlantMode::Integrator) {
      position += velocity * cfg.dt;
      position.x() = std::clamp(position.x(), x_lo, x_hi);
      position.y() = std::clamp(position.y(), y_lo, y_hi);
      const double coords[2] = {position.x(), position.y()};
      state = state_grid.locate(coords);
    } else {
      state = sample(env.row(step, state, action), rng);
      const auto pt = state_grid.point(state);
      position = Eigen::Vector2d(pt[0], pt[1]);
    }

    if ((position - cfg.goal).norm() <= cfg.goal_radius) {
      if (++idle >= idle_needed) {
        rec.status = TerminalStatus::GoalReached;
        rec.step_count = step;
        return rec;
      }
    } else {
      idle = 0;
    }
  }
  rec.status = TerminalStatus::MaxSteps;
  rec.step_count = cfg.max_steps;
  return rec;
}

std::vector<TrajectoryRecord> batch_rollouts(
    const Grid& state_grid, const Grid& action_grid, const EnvironmentKernel& env,
    const CostModel& costs, const std::function<std::unique_ptr<Controller>()>& make_controller,
    const std::vector<Start>& starts, const RolloutConfig& cfg_template, Exec exec) {
  std::vector<TrajectoryRecord> out(starts.size());

  const std::int64_t n = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    RolloutConfig cfg = cfg_template;
    cfg.initial_state.reset();
    cfg.initial_position.reset();
    cfg.initial_prior.reset();
    if (std::holds_alternative<int>(starts[i]))
      cfg.initial_state = std::get<int>(starts[i]);
    else
      cfg.initial_position = std::get<Eigen::Vector2d>(starts[i]);
    cfg.stream_id = cfg_template.stream_id + static_cast<std::uint32_t>(i);
    try {
      auto controller = make_controller();
      out[i] = rollout(state_grid, action_grid, env, costs, *controller, cfg);
    } catch (const std::exception& e) {
      out[i].status = TerminalStatus::Error;
      out[i].error = e.what();
      out[i].step_count = 0;
    }
  }
  return out;
}

}  // namespace feg
