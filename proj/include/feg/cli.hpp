#pragma once

#include <string>
#include <vector>

#include "feg/scenario.hpp"

namespace feg {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

/// Everything a run needs: scenario parameters, solver tolerances, and
/// rollout defaults. Loaded from a JSON file with one section per struct;
/// missing keys take the defaults below, unknown keys are errors.
struct AppConfig {
  NavScenarioConfig scenario;
  SolveOptions solver;

  struct Rollout {
    PlantMode plant = PlantMode::Integrator;
    int max_steps = 3000;
    double goal_radius = 0.08;
    double idle_duration = 2.0;
    std::uint64_t seed = 1;
    std::vector<Eigen::Vector2d> starts{{1.3, 0.0}, {1.3, 0.8}, {1.3, -0.8}, {0.0, 0.85},
                                        {0.9, -0.6}};
  } rollout;
};

AppConfig load_config(const std::string& path);  // throws on any config error
std::string dump_config(const AppConfig& cfg);   // JSON snapshot, round-trips

struct PlanArgs {
  std::string config_path;  // empty = defaults
  int horizon = 1;
  std::string out_dir = ".";
};

struct RolloutArgs {
  std::string config_path;
  std::string starts;  // "px,py;px,py;..." overriding the config, may be empty
  std::uint64_t seed = 0;  // 0 = keep the config's seed
  bool seed_set = false;
  std::string out_dir = ".";
  int primitive = -1;  // >= 0: roll out that single primitive instead of gating
};

struct HeatmapArgs {
  std::string config_path;
  std::string out_file = "cost_heatmap.csv";
};

struct OracleArgs {
  std::string suite;
  std::uint64_t seed = 20260811;
};

int run_plan(const PlanArgs& args);
int run_rollout(const RolloutArgs& args);
int run_heatmap(const HeatmapArgs& args);
int run_oracle_check(const OracleArgs& args);

}  // namespace feg
