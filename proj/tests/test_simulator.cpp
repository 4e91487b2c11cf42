#include <cmath>
#include <map>

#include "doctest.h"
#include "feg/scenario.hpp"
#include "oracles.hpp"

using namespace feg;

namespace {

// Small navigation instance: full machinery, quick to build.
NavScenarioConfig tiny_nav_config() {
  NavScenarioConfig cfg;
  cfg.state_bins_x = 17;
  cfg.state_bins_y = 11;
  cfg.action_bins = 5;
  return cfg;
}

struct TinyNav {
  NavScenario scn;
  StepProblemFactory factory;
  explicit TinyNav(const NavScenarioConfig& cfg = tiny_nav_config())
      : scn(build_scenario(cfg)), factory(scn.env, scn.gen, scn.costs, scn.prims) {}
};

// Identity plant: the state never moves, whatever the action.
EnvironmentKernel identity_kernel(const Grid& state_grid, const Grid& action_grid) {
  EnvironmentKernel::Table rows;
  for (int x = 0; x < state_grid.flat_size(); ++x)
    for (int u = 0; u < action_grid.flat_size(); ++u)
      rows.push_back(FiniteDistribution::point_mass(state_grid, x));
  return EnvironmentKernel::stationary(state_grid, action_grid, rows);
}

}  // namespace

TEST_SUITE_BEGIN("simulator");

TEST_CASE("idle rule: starting at the goal terminates after exactly the idle window") {
  TinyNav t;
  GreedyController ctrl(t.factory, t.scn.lookahead);

  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.seed = 5;
  cfg.initial_position = Eigen::Vector2d(t.scn.cfg.goal);
  cfg.plant = PlantMode::Integrator;

  const auto rec = rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg);
  CHECK(rec.status == TerminalStatus::GoalReached);
  CHECK(rec.step_count == cfg.idle_steps());
  CHECK(cfg.idle_steps() == 61);
  CHECK(static_cast<int>(rec.steps.size()) == rec.step_count);
}

TEST_CASE("kernel plant with an identity kernel idles in place") {
  TinyNav t;
  auto env = identity_kernel(t.scn.state_grid, t.scn.action_grid);
  GreedyController ctrl(t.factory, t.scn.lookahead);

  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.seed = 5;
  const double start[2] = {t.scn.cfg.goal.x(), t.scn.cfg.goal.y()};
  cfg.initial_state = t.scn.state_grid.locate(start);
  cfg.plant = PlantMode::Kernel;

  const auto rec = rollout(t.scn.state_grid, t.scn.action_grid, env, t.scn.costs, ctrl, cfg);
  CHECK(rec.status == TerminalStatus::GoalReached);
  CHECK(rec.step_count == 61);
}

TEST_CASE("max_steps terminates a hopeless episode after one step") {
  TinyNav t;
  GreedyController ctrl(t.factory, t.scn.lookahead);
  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.max_steps = 1;
  cfg.initial_position = Eigen::Vector2d(1.3, 0.8);
  const auto rec = rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg);
  CHECK(rec.status == TerminalStatus::MaxSteps);
  CHECK(rec.step_count == 1);
  CHECK(rec.steps.size() == 1);
}

TEST_CASE("fixed seed reproduces the record bitwise") {
  TinyNav t;
  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.seed = 99;
  cfg.max_steps = 400;
  cfg.initial_position = Eigen::Vector2d(1.0, 0.5);

  auto run = [&]() {
    GreedyController ctrl(t.factory, t.scn.lookahead);
    return rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg);
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.steps.size() == b.steps.size());
  CHECK(a.status == b.status);
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].state == b.steps[i].state);
    CHECK(a.steps[i].action == b.steps[i].action);
    CHECK(a.steps[i].objective == b.steps[i].objective);
    CHECK(a.steps[i].position == b.steps[i].position);
    for (int j = 0; j < a.steps[i].weights.size(); ++j)
      CHECK(a.steps[i].weights[j] == b.steps[i].weights[j]);
  }
}

TEST_CASE("records stay on the simplex and replay their objectives") {
  TinyNav t;
  GreedyController ctrl(t.factory, t.scn.lookahead);
  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.seed = 3;
  cfg.max_steps = 200;
  cfg.initial_position = Eigen::Vector2d(0.8, -0.4);
  const auto rec = rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg);

  for (const auto& s : rec.steps) {
    CHECK(s.weights.minCoeff() >= 0.0);
    CHECK(std::abs(s.weights.sum() - 1.0) <= 1e-10);
    // offline replay of the instantaneous objective from the recorded state
    const StepProblem sp =
        t.factory.make_greedy(s.state, 1, t.scn.lookahead.row(s.state).transpose());
    CHECK(std::abs(objective(sp, Weights(s.weights)) - s.objective) <= 1e-10);
    CHECK(s.state_cost == doctest::Approx(t.scn.costs.state_cost(1)[s.state]));
  }
}

TEST_CASE("kernel plant transitions follow the kernel row") {
  // all rows equal: every step samples the same next-state law regardless of
  // the current state, pinning (x, u) statistically
  Grid state_grid({{0.0, 1.0, 6}, {0.0, 1.0, 1}});
  Grid action_grid({{0.0, 1.0, 2}, {0.0, 1.0, 1}});
  Eigen::VectorXd row(6);
  row << 0.3, 0.05, 0.25, 0.1, 0.2, 0.1;
  EnvironmentKernel::Table rows(
      12, FiniteDistribution::from_weights(state_grid, row));
  auto env = EnvironmentKernel::stationary(state_grid, action_grid, rows);

  struct UniformController : Controller {
    const Grid* ag;
    explicit UniformController(const Grid& g) : ag(&g) {}
    GreedyDecision decide(int, int) override {
      return {Weights::basis(1, 0), FiniteDistribution::uniform(*ag), 0.0, 0.0};
    }
  } ctrl(action_grid);

  RolloutConfig cfg;
  cfg.plant = PlantMode::Kernel;
  cfg.initial_state = 0;
  cfg.max_steps = 10000;
  cfg.goal = Eigen::Vector2d(100.0, 100.0);  // unreachable
  cfg.seed = 17;
  CostModel costs = CostModel::stationary(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(2));
  const auto rec = rollout(state_grid, action_grid, env, costs, ctrl, cfg);
  REQUIRE(rec.step_count == 10000);

  Eigen::VectorXd freq = Eigen::VectorXd::Zero(6);
  for (std::size_t i = 1; i < rec.steps.size(); ++i) freq[rec.steps[i].state] += 1.0;
  freq /= static_cast<double>(rec.steps.size() - 1);
  CHECK(test::total_variation(freq, row) <= 0.02);
}

TEST_CASE("start specification") {
  TinyNav t;
  GreedyController ctrl(t.factory, t.scn.lookahead);
  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.max_steps = 5;

  SUBCASE("exactly one start form is required") {
    CHECK_THROWS_AS(rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg),
                    std::invalid_argument);
    cfg.initial_state = 0;
    cfg.initial_position = Eigen::Vector2d(0.0, 0.0);
    CHECK_THROWS_AS(rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg),
                    std::invalid_argument);
  }

  SUBCASE("a prior start samples deterministically given the seed") {
    cfg.initial_prior = t.scn.gen.initial_prior;
    cfg.seed = 31337;
    const auto a = rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg);
    const auto b = rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg);
    REQUIRE_FALSE(a.steps.empty());
    CHECK(a.steps[0].state == b.steps[0].state);
  }
}

TEST_CASE("a precomputed plan can drive the rollout") {
  TinyNav t;
  const Plan plan = backward_recursion(t.scn.env, t.scn.gen, t.scn.costs, t.scn.prims, 3);
  PlanController ctrl(plan, t.factory);

  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.seed = 8;
  cfg.max_steps = 10;  // beyond the horizon: the last step's policy repeats
  cfg.initial_position = Eigen::Vector2d(0.5, 0.2);
  const auto rec = rollout(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs, ctrl, cfg);
  REQUIRE(rec.steps.size() == 10);
  for (int k = 0; k < 3; ++k) {
    const auto& s = rec.steps[k];
    const auto& expect = plan.policies.at(k + 1, s.state);
    for (int i = 0; i < expect.size(); ++i) CHECK(s.weights[i] == expect[i]);
  }
  const auto& tail = rec.steps[9];
  const auto& expect = plan.policies.at(3, tail.state);
  for (int i = 0; i < expect.size(); ++i) CHECK(tail.weights[i] == expect[i]);
}

TEST_CASE("batch rollouts") {
  TinyNav t;
  RolloutConfig cfg;
  cfg.goal = t.scn.cfg.goal;
  cfg.dt = t.scn.cfg.dt;
  cfg.seed = 11;
  cfg.max_steps = 150;

  auto make = [&]() -> std::unique_ptr<Controller> {
    return std::make_unique<GreedyController>(t.factory, t.scn.lookahead);
  };

  SUBCASE("serial and parallel agree bitwise") {
    std::vector<Start> starts{Eigen::Vector2d(1.0, 0.5), Eigen::Vector2d(-0.5, -0.5),
                              Eigen::Vector2d(1.2, -0.7), Eigen::Vector2d(0.2, 0.6)};
    const auto a = batch_rollouts(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs,
                                  make, starts, cfg, Exec::Serial);
    const auto b = batch_rollouts(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs,
                                  make, starts, cfg, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].steps.size() == b[i].steps.size());
      for (std::size_t s = 0; s < a[i].steps.size(); ++s) {
        CHECK(a[i].steps[s].state == b[i].steps[s].state);
        CHECK(a[i].steps[s].action == b[i].steps[s].action);
        CHECK(a[i].steps[s].position == b[i].steps[s].position);
      }
    }
  }

  SUBCASE("empty starts yield empty output") {
    const auto out = batch_rollouts(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs,
                                    make, {}, cfg);
    CHECK(out.empty());
  }

  SUBCASE("a failing controller poisons only its own record") {
    struct Bomb : Controller {
      GreedyDecision decide(int, int) override { throw std::runtime_error("boom"); }
    };
    int built = 0;
    auto make_mixed = [&]() -> std::unique_ptr<Controller> {
      // first rollout explodes, the second runs normally; construction order
      // is the list order even under OpenMP because each index builds its own
      if (built++ == 0) return std::make_unique<Bomb>();
      return std::make_unique<GreedyController>(t.factory, t.scn.lookahead);
    };
    std::vector<Start> starts{Eigen::Vector2d(1.0, 0.5), Eigen::Vector2d(-0.5, -0.5)};
    const auto out = batch_rollouts(t.scn.state_grid, t.scn.action_grid, t.scn.env, t.scn.costs,
                                    make_mixed, starts, cfg, Exec::Serial);
    REQUIRE(out.size() == 2);
    CHECK(out[0].status == TerminalStatus::Error);
    CHECK(out[0].error == "boom");
    CHECK(out[1].status != TerminalStatus::Error);
    CHECK_FALSE(out[1].steps.empty());
  }
}

TEST_SUITE_END();
