#include <array>
#include <cmath>

#include "doctest.h"
#include "feg/planner.hpp"
#include "feg/scenario.hpp"
#include "oracles.hpp"

using namespace feg;

namespace {

// One shared full-size build for the whole suite.
const NavScenario& nav() {
  static const NavScenario scn = build_scenario(NavScenarioConfig{});
  return scn;
}

int state_at(double px, double py) {
  const double c[2] = {px, py};
  return nav().state_grid.locate(c);
}

Eigen::Vector2d pmf_mean_action(const FiniteDistribution& d, const Grid& action_grid) {
  Eigen::Vector2d m(0.0, 0.0);
  for (int u = 0; u < d.size(); ++u) {
    const auto pt = action_grid.point(u);
    m.x() += d[u] * pt[0];
    m.y() += d[u] * pt[1];
  }
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("scenario");

TEST_CASE("config validation") {
  NavScenarioConfig bad;
  bad.state_bins_x = 0;
  CHECK_THROWS_AS(build_scenario(bad), std::invalid_argument);
  NavScenarioConfig bad2;
  bad2.process_var = 0.0;
  CHECK_THROWS_AS(build_scenario(bad2), std::invalid_argument);
  NavScenarioConfig bad3;
  bad3.goal = Eigen::Vector2d(5.0, 0.0);
  CHECK_THROWS_AS(build_scenario(bad3), std::invalid_argument);
}

TEST_CASE("kernel row at the origin with zero velocity peaks at the origin bin") {
  const auto& scn = nav();
  const double zero[2] = {0.0, 0.0};
  const int x0 = scn.state_grid.locate(zero);
  const int u0 = scn.action_grid.locate(zero);
  CHECK(scn.env.row(1, x0, u0).mode() == x0);
  CHECK(scn.gen.ref_kernel.row(1, x0, u0).mode() == x0);
}

TEST_CASE("primitive means: proportional control toward each boundary") {
  NavScenarioConfig cfg;
  // at the right wall, the right primitive is exactly zero pre-clipping
  const Eigen::Vector2d at_wall = primitive_mean(cfg, 0, {cfg.x_max, 0.3});
  CHECK(at_wall.x() == 0.0);
  CHECK(at_wall.y() == 0.0);

  // cardinal sign pattern at the workspace center
  const Eigen::Vector2d center(0.0, 0.0);
  CHECK(primitive_mean(cfg, 0, center).x() > 0.0);
  CHECK(primitive_mean(cfg, 1, center).x() < 0.0);
  CHECK(primitive_mean(cfg, 2, center).y() > 0.0);
  CHECK(primitive_mean(cfg, 3, center).y() < 0.0);
  for (int i = 0; i < 2; ++i) CHECK(primitive_mean(cfg, i, center).y() == 0.0);
  for (int i = 2; i < 4; ++i) CHECK(primitive_mean(cfg, i, center).x() == 0.0);

  // the discretized pmfs keep the pattern
  const auto& scn = nav();
  const int xc = state_at(0.0, 0.0);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d m = pmf_mean_action(scn.prims.primitive(1, i, xc), scn.action_grid);
    const Eigen::Vector2d expect = primitive_mean(scn.cfg, i, {0.0, 0.0});
    if (std::abs(expect.x()) > 0.0) {
      CHECK(m.x() * expect.x() > 0.0);
      CHECK(std::abs(m.y()) < 0.25 * std::abs(m.x()));
    } else {
      CHECK(m.y() * expect.y() > 0.0);
      CHECK(std::abs(m.x()) < 0.25 * std::abs(m.y()));
    }
  }
}

TEST_CASE("every row is a floored pmf") {
  const auto& scn = nav();
  const double eps = scn.cfg.support_floor;
  const int nu = scn.action_grid.flat_size();
  const double state_floor = eps / (1.0 + scn.state_grid.flat_size() * eps);
  const double action_floor = eps / (1.0 + nu * eps);

  for (int x = 0; x < scn.state_grid.flat_size(); ++x) {
    for (int u = 0; u < nu; ++u) {
      const auto& p = scn.env.row(1, x, u);
      const auto& q = scn.gen.ref_kernel.row(1, x, u);
      CHECK(p.probs().sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(q.probs().sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.probs().minCoeff() >= state_floor);
      CHECK(q.probs().minCoeff() >= state_floor);
    }
    const auto& rho = scn.gen.policy_row(1, x);
    CHECK(rho.probs().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.probs().minCoeff() >= action_floor);
    for (int i = 0; i < 4; ++i) {
      const auto& pi = scn.prims.primitive(1, i, x);
      CHECK(pi.probs().sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(pi.probs().minCoeff() >= action_floor);
      CHECK(pi.probs().maxCoeff() <= 1.0);  // bounded
    }
  }
}

TEST_CASE("the built scenario satisfies the standing assumptions") {
  const auto& scn = nav();
  const auto rep = check_feasibility(scn.env, scn.gen, scn.prims);
  CHECK(rep.feasible);
  CHECK(rep.violations.empty());
}

TEST_CASE("state cost") {
  NavScenarioConfig cfg;

  SUBCASE("unit-height gaussian peaks at the configured gains") {
    const auto terms = state_cost_terms(cfg, cfg.obstacles[0]);
    CHECK(terms.obstacle[0] == 150.0);  // exactly the gain at the peak
    CHECK(terms.obstacle[1] < 1.0);
    CHECK(terms.obstacle[2] < 1.0);
  }

  SUBCASE("obstacle centers dominate clear cells") {
    const auto& scn = nav();
    const double peak = state_cost(cfg, cfg.obstacles[0]);
    for (int x = 0; x < scn.state_grid.flat_size(); ++x) {
      const auto pt = scn.state_grid.point(x);
      const Eigen::Vector2d pos(pt[0], pt[1]);
      bool clear = pos.x() - cfg.x_min >= 2 * cfg.obstacle_width &&
                   cfg.x_max - pos.x() >= 2 * cfg.obstacle_width &&
                   pos.y() - cfg.y_min >= 2 * cfg.obstacle_width &&
                   cfg.y_max - pos.y() >= 2 * cfg.obstacle_width;
      for (const auto& o : cfg.obstacles) clear = clear && (pos - o).norm() >= 2 * cfg.obstacle_width;
      if (clear) CHECK(state_cost(cfg, pos) < peak);
    }
  }

  SUBCASE("heat map shape: three interior peaks and an elevated rim") {
    const auto& scn = nav();
    const auto& grid = scn.state_grid;
    auto cost_at = [&](int ix, int iy) {
      return state_cost(cfg, {grid.center(0, ix), grid.center(1, iy)});
    };
    // each obstacle bin is a local maximum among its 8 neighbours
    for (const auto& o : cfg.obstacles) {
      const double c[2] = {o.x(), o.y()};
      std::array<int, 2> multi;
      grid.unflatten(grid.locate(c), multi);
      const double here = cost_at(multi[0], multi[1]);
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
          if (dx == 0 && dy == 0) continue;
          CHECK(here > cost_at(multi[0] + dx, multi[1] + dy));
        }
    }
    // boundary cells sit above the open-field level
    double rim_min = 1e300, open_max = -1e300;
    for (int ix = 0; ix < cfg.state_bins_x; ++ix)
      for (int iy = 0; iy < cfg.state_bins_y; ++iy) {
        const Eigen::Vector2d pos(grid.center(0, ix), grid.center(1, iy));
        const bool rim = ix == 0 || iy == 0 || ix == cfg.state_bins_x - 1 ||
                         iy == cfg.state_bins_y - 1;
        bool open = !rim;
        for (const auto& o : cfg.obstacles) open = open && (pos - o).norm() > 4 * cfg.obstacle_width;
        open = open && pos.x() - cfg.x_min > 4 * cfg.wall_width &&
               cfg.x_max - pos.x() > 4 * cfg.wall_width &&
               pos.y() - cfg.y_min > 4 * cfg.wall_width && cfg.y_max - pos.y() > 4 * cfg.wall_width;
        if (rim) rim_min = std::min(rim_min, state_cost(cfg, pos));
        if (open) open_max = std::max(open_max, state_cost(cfg, pos));
      }
    CHECK(rim_min > open_max);
  }
}

TEST_CASE("batched kernel rows reproduce discretize_gaussian exactly") {
  const auto& scn = nav();
  const auto& cfg = scn.cfg;
  RngStream rng(999);
  for (int t = 0; t < 20; ++t) {
    const int x = static_cast<int>(rng.uniform01() * scn.state_grid.flat_size());
    const int u = static_cast<int>(rng.uniform01() * scn.action_grid.flat_size());
    const int nby = cfg.state_bins_y, nbu = cfg.action_bins;
    const Eigen::Vector2d mean(
        scn.state_grid.center(0, x / nby) + cfg.dt * scn.action_grid.center(0, u / nbu),
        scn.state_grid.center(1, x % nby) + cfg.dt * scn.action_grid.center(1, u % nbu));
    const auto direct = discretize_gaussian(
        scn.state_grid, mean, Eigen::Vector2d(cfg.process_var, cfg.process_var),
        cfg.support_floor);
    CHECK(scn.env.row(1, x, u).probs() == direct.probs());
  }
}

TEST_CASE("lookahead table equals the per-entry heuristic") {
  const auto& scn = nav();
  RngStream rng(2718);
  for (int t = 0; t < 25; ++t) {
    const int x = static_cast<int>(rng.uniform01() * scn.state_grid.flat_size());
    const int u = static_cast<int>(rng.uniform01() * scn.action_grid.flat_size());
    CHECK(scn.lookahead(x, u) ==
          doctest::Approx(heuristic_cost_to_go(scn.env, scn.costs, x, u)).epsilon(1e-10));
  }
}

TEST_CASE("serial and parallel builds agree bitwise") {
  NavScenarioConfig cfg;
  cfg.state_bins_x = 9;
  cfg.state_bins_y = 7;
  cfg.action_bins = 3;
  const NavScenario a = build_scenario(cfg, Exec::Serial);
  const NavScenario b = build_scenario(cfg, Exec::Parallel);
  for (int x = 0; x < a.state_grid.flat_size(); ++x)
    for (int u = 0; u < a.action_grid.flat_size(); ++u) {
      CHECK(a.env.row(1, x, u).probs() == b.env.row(1, x, u).probs());
      CHECK(a.lookahead(x, u) == b.lookahead(x, u));
    }
}

TEST_CASE("near an obstacle the inward primitive is down-weighted") {
  const auto& scn = nav();
  const StepProblemFactory factory = scn.make_factory();
  // two bins below the obstacle at (0, 0.5): 'up' points straight into it
  const int x = state_at(0.0, 0.5 - 2.0 * scn.state_grid.width(1));
  const GreedyDecision dec = greedy_step(factory, x, scn.lookahead.row(x).transpose());
  const int up = 2;
  for (int i = 0; i < 4; ++i) {
    if (i == up) continue;
    CHECK(dec.weights[up] < dec.weights[i]);
  }
}

TEST_SUITE_END();
