#include "feg/scenario.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace feg {

void NavScenarioConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("NavScenarioConfig: ") + what);
  };
  require(x_min < x_max && y_min < y_max, "workspace bounds must be ordered");
  require(u_min < u_max, "velocity bounds must be ordered");
  require(state_bins_x >= 1 && state_bins_y >= 1 && action_bins >= 1, "bin counts must be >= 1");
  require(dt > 0.0, "dt must be positive");
  require(process_var > 0.0 && ref_process_var > 0.0 && primitive_var > 0.0 &&
              ref_policy_var > 0.0,
          "variances must be positive");
  require(obstacle_width > 0.0 && wall_width > 0.0, "penalty widths must be positive");
  require(obstacle_gain >= 0.0 && wall_gain >= 0.0, "gains must be non-negative");
  require(primitive_gain > 0.0 && reference_gain > 0.0, "controller gains must be positive");
  require(support_floor > 0.0, "support floor must be positive");
  require(goal.x() >= x_min && goal.x() <= x_max && goal.y() >= y_min && goal.y() <= y_max,
          "goal must lie inside the workspace");
}

Eigen::Vector2d primitive_mean(const NavScenarioConfig& cfg, int primitive,
                               const Eigen::Vector2d& pos) {
  const double kp = cfg.primitive_gain;
  switch (primitive) {
    case 0: return {kp * (cfg.x_max - pos.x()), 0.0};   // right
    case 1: return {-kp * (pos.x() - cfg.x_min), 0.0};  // left
    case 2: return {0.0, kp * (cfg.y_max - pos.y())};   // up
    case 3: return {0.0, -kp * (pos.y() - cfg.y_min)};  // down
    default: throw std::out_of_range("primitive_mean: primitive index must be 0..3");
  }
}

double StateCostTerms::total() const {
  return std::accumulate(obstacle.begin(), obstacle.end(), 0.0) +
         std::accumulate(wall.begin(), wall.end(), 0.0);
}

StateCostTerms state_cost_terms(const NavScenarioConfig& cfg, const Eigen::Vector2d& pos) {
  StateCostTerms t;
  for (const auto& obs : cfg.obstacles) {
    const double d2 = (pos - obs).squaredNorm();
    t.obstacle.push_back(cfg.obstacle_gain *
                         std::exp(-d2 / (2.0 * cfg.obstacle_width * cfg.obstacle_width)));
  }
  const double dists[4] = {pos.x() - cfg.x_min, cfg.x_max - pos.x(), pos.y() - cfg.y_min,
                           cfg.y_max - pos.y()};
  for (double d : dists)
    t.wall.push_back(cfg.wall_gain * std::exp(-d * d / (2.0 * cfg.wall_width * cfg.wall_width)));
  return t;
}

double state_cost(const NavScenarioConfig& cfg, const Eigen::Vector2d& pos) {
  return state_cost_terms(cfg, pos).total();
}

namespace {

Eigen::Vector2d clip_velocity(const NavScenarioConfig& cfg, Eigen::Vector2d u) {
  u.x() = std::clamp(u.x(), cfg.u_min, cfg.u_max);
  u.y() = std::clamp(u.y(), cfg.u_min, cfg.u_max);
  return u;
}

}  // namespace

NavScenario build_scenario(const NavScenarioConfig& cfg, Exec exec) {
  cfg.validate();

  Grid state_grid({{cfg.x_min, cfg.x_max, cfg.state_bins_x}, {cfg.y_min, cfg.y_max, cfg.state_bins_y}});
  Grid action_grid({{cfg.u_min, cfg.u_max, cfg.action_bins}, {cfg.u_min, cfg.u_max, cfg.action_bins}});
  const int nx = state_grid.flat_size();
  const int nu = action_grid.flat_size();

  const Eigen::Vector2d var_u(cfg.primitive_var, cfg.primitive_var);
  const Eigen::Vector2d var_ur(cfg.ref_policy_var, cfg.ref_policy_var);

  // Kernel rows p(.|u,x) = N(x + u dt, var) integrated over the state bins;
  // same construction for the reference kernel with its own variance. The
  // mean separates per axis as center + dt * velocity, so the per-axis erf
  // masses are cached once per (state bin, velocity bin) pair and each row
  // is just their outer product; the result is bit-identical to calling
  // discretize_gaussian row by row.
  const int nbx = cfg.state_bins_x, nby = cfg.state_bins_y, nbu = cfg.action_bins;
  std::vector<Eigen::VectorXd> env_mx(nbx * nbu), ref_mx(nbx * nbu);
  std::vector<Eigen::VectorXd> env_my(nby * nbu), ref_my(nby * nbu);
  for (int iv = 0; iv < nbu; ++iv) {
    for (int ix = 0; ix < nbx; ++ix) {
      const double mean = state_grid.center(0, ix) + cfg.dt * action_grid.center(0, iv);
      env_mx[ix * nbu + iv] = detail::gaussian_axis_masses(state_grid, 0, mean, cfg.process_var);
      ref_mx[ix * nbu + iv] =
          detail::gaussian_axis_masses(state_grid, 0, mean, cfg.ref_process_var);
    }
    for (int iy = 0; iy < nby; ++iy) {
      const double mean = state_grid.center(1, iy) + cfg.dt * action_grid.center(1, iv);
      env_my[iy * nbu + iv] = detail::gaussian_axis_masses(state_grid, 1, mean, cfg.process_var);
      ref_my[iy * nbu + iv] =
          detail::gaussian_axis_masses(state_grid, 1, mean, cfg.ref_process_var);
    }
  }

  // Rows are staged in empty optionals so workers never free memory that
  // another thread's allocator arena owns.
  std::vector<std::optional<FiniteDistribution>> env_stage(static_cast<std::size_t>(nx) * nu);
  std::vector<std::optional<FiniteDistribution>> ref_stage(env_stage.size());
  std::vector<std::optional<FiniteDistribution>> policy_stage(nx);
  std::vector<std::vector<std::optional<FiniteDistribution>>> prim_stage(
      4, std::vector<std::optional<FiniteDistribution>>(nx));
  Eigen::VectorXd cx(nx);

#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::Parallel)
  for (int x = 0; x < nx; ++x) {
    const int ix = x / nby, iy = x % nby;
    const auto pt = state_grid.point(x);
    const Eigen::Vector2d pos(pt[0], pt[1]);
    for (int u = 0; u < nu; ++u) {
      const int ivx = u / nbu, ivy = u % nbu;
      const Eigen::VectorXd& mx = env_mx[ix * nbu + ivx];
      const Eigen::VectorXd& my = env_my[iy * nbu + ivy];
      Eigen::VectorXd joint(nx);
      for (int a = 0; a < nbx; ++a)
        for (int b = 0; b < nby; ++b) joint[a * nby + b] = mx[a] * my[b];
      env_stage[static_cast<std::size_t>(x) * nu + u] =
          FiniteDistribution::from_weights(state_grid, std::move(joint), cfg.support_floor);
      const Eigen::VectorXd& rx = ref_mx[ix * nbu + ivx];
      const Eigen::VectorXd& ry = ref_my[iy * nbu + ivy];
      Eigen::VectorXd jointr(nx);
      for (int a = 0; a < nbx; ++a)
        for (int b = 0; b < nby; ++b) jointr[a * nby + b] = rx[a] * ry[b];
      ref_stage[static_cast<std::size_t>(x) * nu + u] =
          FiniteDistribution::from_weights(state_grid, std::move(jointr), cfg.support_floor);
    }
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector2d mean = clip_velocity(cfg, primitive_mean(cfg, i, pos));
      prim_stage[i][x] = discretize_gaussian(action_grid, mean, var_u, cfg.support_floor);
    }
    const Eigen::Vector2d ref_mean = clip_velocity(cfg, cfg.reference_gain * (cfg.goal - pos));
    policy_stage[x] = discretize_gaussian(action_grid, ref_mean, var_ur, cfg.support_floor);
    cx[x] = state_cost(cfg, pos);
  }

  auto collect = [](std::vector<std::optional<FiniteDistribution>>& stage) {
    std::vector<FiniteDistribution> out;
    out.reserve(stage.size());
    for (auto& s : stage) out.push_back(std::move(*s));
    return out;
  };
  EnvironmentKernel::Table env_rows = collect(env_stage);
  EnvironmentKernel::Table ref_rows = collect(ref_stage);
  std::vector<FiniteDistribution> ref_policy = collect(policy_stage);
  std::vector<std::vector<FiniteDistribution>> prim_rows;
  for (auto& stage : prim_stage) prim_rows.push_back(collect(stage));

  EnvironmentKernel env = EnvironmentKernel::stationary(state_grid, action_grid, std::move(env_rows));
  EnvironmentKernel refk = EnvironmentKernel::stationary(state_grid, action_grid, std::move(ref_rows));

  // Uniform prior over starting states; rollouts normally pin the start.
  GenerativeModel gen{std::move(refk), {std::move(ref_policy)}, FiniteDistribution::uniform(state_grid)};
  CostModel costs = CostModel::stationary(cx, Eigen::VectorXd::Zero(nu));
  PrimitiveSet prims = PrimitiveSet::create(action_grid, {std::move(prim_rows)});

  // Heuristic lookahead h(x,u): expected state cost after applying u twice.
  // Two passes of expected-immediate-cost keep it O(|X|^2 |U|).
  Eigen::MatrixXd imm(nx, nu);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int x = 0; x < nx; ++x)
    for (int u = 0; u < nu; ++u) imm(x, u) = env.row(1, x, u).probs().dot(cx);
  Eigen::MatrixXd lookahead(nx, nu);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int x = 0; x < nx; ++x)
    for (int u = 0; u < nu; ++u) lookahead(x, u) = env.row(1, x, u).probs().dot(imm.col(u));

  return NavScenario{cfg,
                     std::move(state_grid),
                     std::move(action_grid),
                     std::move(env),
                     std::move(gen),
                     std::move(costs),
                     std::move(prims),
                     std::move(lookahead)};
}

}  // namespace feg
