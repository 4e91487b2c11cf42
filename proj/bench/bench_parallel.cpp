// Compares the serial reference loops against the OpenMP kernels, phase by
// phase, on prebuilt fixtures: scenario construction, the step-problem
// caches, one backward recursion, and a batch of greedy rollouts. Verifies
// first that serial and parallel recursions agree bitwise.
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <functional>

#include "feg/cli.hpp"
#include "feg/scenario.hpp"

using namespace feg;

namespace {

double timed(const std::function<void()>& fn) {
  const double t0 = omp_get_wtime();
  fn();
  return omp_get_wtime() - t0;
}

void report(const char* name, const std::function<void()>& serial,
            const std::function<void()>& parallel) {
  const double ts = timed(serial);
  const double tp = timed(parallel);
  std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %.2fx\n", name, ts, tp, ts / tp);
}

}  // namespace

int main() {
  const AppConfig cfg;
  std::printf("threads: %d\n", omp_get_max_threads());

  // sanity: serial and parallel recursions agree bitwise
  {
    NavScenarioConfig sc = cfg.scenario;
    sc.state_bins_x = 9;
    sc.state_bins_y = 7;
    const NavScenario scn = build_scenario(sc, Exec::Parallel);
    const Plan a =
        backward_recursion(scn.env, scn.gen, scn.costs, scn.prims, 2, cfg.solver, Exec::Serial);
    const Plan b =
        backward_recursion(scn.env, scn.gen, scn.costs, scn.prims, 2, cfg.solver, Exec::Parallel);
    double diff = 0.0;
    for (int k = 1; k <= 3; ++k)
      diff = std::max(diff, (a.values.at(k) - b.values.at(k)).cwiseAbs().maxCoeff());
    std::printf("serial/parallel recursion max |diff|: %g\n", diff);
    if (diff != 0.0) {
      std::printf("MISMATCH\n");
      return 1;
    }
  }

  report(
      "build_scenario (full)", [&] { (void)build_scenario(cfg.scenario, Exec::Serial); },
      [&] { (void)build_scenario(cfg.scenario, Exec::Parallel); });

  const NavScenario scn = build_scenario(cfg.scenario, Exec::Parallel);
  report(
      "step-problem caches",
      [&] { StepProblemFactory f(scn.env, scn.gen, scn.costs, scn.prims, false); },
      [&] { StepProblemFactory f(scn.env, scn.gen, scn.costs, scn.prims, true); });

  report(
      "backward_recursion (N=2)",
      [&] { (void)backward_recursion(scn.env, scn.gen, scn.costs, scn.prims, 2, cfg.solver,
                                     Exec::Serial); },
      [&] { (void)backward_recursion(scn.env, scn.gen, scn.costs, scn.prims, 2, cfg.solver,
                                     Exec::Parallel); });

  const StepProblemFactory factory = scn.make_factory();
  RolloutConfig rc;
  rc.max_steps = 600;
  rc.goal = cfg.scenario.goal;
  rc.dt = cfg.scenario.dt;
  rc.seed = 7;
  std::vector<Start> starts;
  for (const auto& s : cfg.rollout.starts) starts.emplace_back(Eigen::Vector2d(s));
  auto make = [&]() -> std::unique_ptr<Controller> {
    return std::make_unique<GreedyController>(factory, scn.lookahead, cfg.solver);
  };
  report(
      "batch_rollouts (5 x 600)",
      [&] { (void)batch_rollouts(scn.state_grid, scn.action_grid, scn.env, scn.costs, make,
                                 starts, rc, Exec::Serial); },
      [&] { (void)batch_rollouts(scn.state_grid, scn.action_grid, scn.env, scn.costs, make,
                                 starts, rc, Exec::Parallel); });
  return 0;
}
