#include "feg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "feg/oracle_checks.hpp"
#include "json.hpp"

namespace feg {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full-precision decimal formatting so emitted CSVs re-read bit-exactly.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("unknown config key '" + it.key() + "' in " + section);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::Vector2d to_vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

void load_scenario_section(const json& j, NavScenarioConfig& s) {
  reject_unknown_keys(
      j,
      {"x_min", "x_max", "y_min", "y_max", "u_min", "u_max", "state_bins_x", "state_bins_y",
       "action_bins", "dt", "process_var", "ref_process_var", "primitive_var", "ref_policy_var",
       "goal", "obstacles", "obstacle_gain", "wall_gain", "obstacle_width", "wall_width",
       "primitive_gain", "reference_gain", "support_floor"},
      "scenario");
  maybe(j, "x_min", s.x_min);
  maybe(j, "x_max", s.x_max);
  maybe(j, "y_min", s.y_min);
  maybe(j, "y_max", s.y_max);
  maybe(j, "u_min", s.u_min);
  maybe(j, "u_max", s.u_max);
  maybe(j, "state_bins_x", s.state_bins_x);
  maybe(j, "state_bins_y", s.state_bins_y);
  maybe(j, "action_bins", s.action_bins);
  maybe(j, "dt", s.dt);
  maybe(j, "process_var", s.process_var);
  maybe(j, "ref_process_var", s.ref_process_var);
  maybe(j, "primitive_var", s.primitive_var);
  maybe(j, "ref_policy_var", s.ref_policy_var);
  if (j.contains("goal")) s.goal = to_vec2(j.at("goal"));
  if (j.contains("obstacles")) {
    s.obstacles.clear();
    for (const auto& o : j.at("obstacles")) s.obstacles.push_back(to_vec2(o));
  }
  maybe(j, "obstacle_gain", s.obstacle_gain);
  maybe(j, "wall_gain", s.wall_gain);
  maybe(j, "obstacle_width", s.obstacle_width);
  maybe(j, "wall_width", s.wall_width);
  maybe(j, "primitive_gain", s.primitive_gain);
  maybe(j, "reference_gain", s.reference_gain);
  maybe(j, "support_floor", s.support_floor);
}

void load_solver_section(const json& j, SolveOptions& s) {
  reject_unknown_keys(j, {"tolerance", "max_iterations"}, "solver");
  maybe(j, "tolerance", s.tol);
  maybe(j, "max_iterations", s.max_iter);
}

void load_rollout_section(const json& j, AppConfig::Rollout& r) {
  reject_unknown_keys(j, {"plant", "max_steps", "goal_radius", "idle_duration", "seed", "starts"},
                      "rollout");
  if (j.contains("plant")) {
    const std::string p = j.at("plant").get<std::string>();
    if (p == "integrator") r.plant = PlantMode::Integrator;
    else if (p == "kernel") r.plant = PlantMode::Kernel;
    else
      throw ConfigError("rollout.plant must be 'integrator' or 'kernel'");
  }
  maybe(j, "max_steps", r.max_steps);
  maybe(j, "goal_radius", r.goal_radius);
  maybe(j, "idle_duration", r.idle_duration);
  maybe(j, "seed", r.seed);
  if (j.contains("starts")) {
    r.starts.clear();
    for (const auto& s : j.at("starts")) r.starts.push_back(to_vec2(s));
  }
}

AppConfig parse_config_json(const json& j) {
  AppConfig cfg;
  reject_unknown_keys(j, {"scenario", "solver", "rollout"}, "top level");
  if (j.contains("scenario")) load_scenario_section(j.at("scenario"), cfg.scenario);
  if (j.contains("solver")) load_solver_section(j.at("solver"), cfg.solver);
  if (j.contains("rollout")) load_rollout_section(j.at("rollout"), cfg.rollout);
  cfg.scenario.validate();
  if (!(cfg.solver.tol > 0.0) || cfg.solver.max_iter < 1)
    throw ConfigError("solver tolerances must be positive");
  if (cfg.rollout.max_steps < 1 || !(cfg.rollout.goal_radius > 0.0))
    throw ConfigError("rollout parameters out of range");
  return cfg;
}

json config_to_json(const AppConfig& cfg) {
  const auto& s = cfg.scenario;
  json js;
  js["x_min"] = s.x_min;
  js["x_max"] = s.x_max;
  js["y_min"] = s.y_min;
  js["y_max"] = s.y_max;
  js["u_min"] = s.u_min;
  js["u_max"] = s.u_max;
  js["state_bins_x"] = s.state_bins_x;
  js["state_bins_y"] = s.state_bins_y;
  js["action_bins"] = s.action_bins;
  js["dt"] = s.dt;
  js["process_var"] = s.process_var;
  js["ref_process_var"] = s.ref_process_var;
  js["primitive_var"] = s.primitive_var;
  js["ref_policy_var"] = s.ref_policy_var;
  js["goal"] = {s.goal.x(), s.goal.y()};
  js["obstacles"] = json::array();
  for (const auto& o : s.obstacles) js["obstacles"].push_back({o.x(), o.y()});
  js["obstacle_gain"] = s.obstacle_gain;
  js["wall_gain"] = s.wall_gain;
  js["obstacle_width"] = s.obstacle_width;
  js["wall_width"] = s.wall_width;
  js["primitive_gain"] = s.primitive_gain;
  js["reference_gain"] = s.reference_gain;
  js["support_floor"] = s.support_floor;

  json jr;
  jr["plant"] = cfg.rollout.plant == PlantMode::Integrator ? "integrator" : "kernel";
  jr["max_steps"] = cfg.rollout.max_steps;
  jr["goal_radius"] = cfg.rollout.goal_radius;
  jr["idle_duration"] = cfg.rollout.idle_duration;
  jr["seed"] = cfg.rollout.seed;
  jr["starts"] = json::array();
  for (const auto& st : cfg.rollout.starts) jr["starts"].push_back({st.x(), st.y()});

  return json{{"scenario", js},
              {"solver", {{"tolerance", cfg.solver.tol}, {"max_iterations", cfg.solver.max_iter}}},
              {"rollout", jr}};
}

AppConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return AppConfig{};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    // a run manifest embeds its config snapshot; accept it directly so a
    // recorded run can be replayed from its manifest alone
    if (j.contains("artifact_version") && j.contains("config"))
      return parse_config_json(j.at("config"));
    return parse_config_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
}

// Run manifest: written (status=incomplete) before any result file, then
// rewritten with timings and outputs once the command finishes.
class Manifest {
 public:
  Manifest(const fs::path& dir, const std::string& command, const AppConfig& cfg,
           std::uint64_t seed, const std::string& filename = "manifest.json")
      : path_(dir / filename) {
    data_["artifact_version"] = kArtifactVersion;
    data_["command"] = command;
    data_["status"] = "incomplete";
    data_["seed"] = seed;
    data_["config"] = config_to_json(cfg);
    data_["outputs"] = json::array();
    data_["timings_sec"] = json::object();
    flush();
  }

  void add_output(const fs::path& p) { data_["outputs"].push_back(p.filename().string()); }
  void set_timing(const std::string& phase, double sec) { data_["timings_sec"][phase] = sec; }

  void complete() {
    data_["status"] = "complete";
    flush();
  }

 private:
  void flush() {
    std::ofstream out(path_);
    if (!out) throw IoError("cannot write manifest '" + path_.string() + "'");
    out << data_.dump(2) << "\n";
    if (!out) throw IoError("manifest write failed");
  }

  fs::path path_;
  json data_;
};

class PhaseTimer {
 public:
  PhaseTimer() : t0_(std::chrono::steady_clock::now()) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot open output file '" + p.string() + "'");
  return out;
}

std::vector<Eigen::Vector2d> parse_starts(const std::string& s) {
  std::vector<Eigen::Vector2d> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    double x, y;
    if (std::sscanf(item.c_str(), "%lf,%lf", &x, &y) != 2)
      throw ConfigError("bad start '" + item + "', expected px,py");
    out.emplace_back(x, y);
  }
  return out;
}

const char* status_name(TerminalStatus st) {
  switch (st) {
    case TerminalStatus::GoalReached: return "goal-reached";
    case TerminalStatus::MaxSteps: return "max-steps";
    default: return "error";
  }
}

void write_trajectory_csv(const fs::path& p, const TrajectoryRecord& rec, int n_prims) {
  auto out = open_out(p);
  out << "step,x_idx,px,py,u_idx,vx,vy";
  for (int i = 1; i <= n_prims; ++i) out << ",w_" << i;
  out << ",objective,state_cost\n";
  for (std::size_t t = 0; t < rec.steps.size(); ++t) {
    const auto& s = rec.steps[t];
    out << (t + 1) << ',' << s.state << ',' << fmt(s.position.x()) << ',' << fmt(s.position.y())
        << ',' << s.action << ',' << fmt(s.velocity.x()) << ',' << fmt(s.velocity.y());
    for (int i = 0; i < s.weights.size(); ++i) out << ',' << fmt(s.weights[i]);
    out << ',' << fmt(s.objective) << ',' << fmt(s.state_cost) << '\n';
  }
  if (!out) throw IoError("write failed: " + p.string());
}

void write_weights_csv(const fs::path& p, const TrajectoryRecord& rec, int n_prims) {
  auto out = open_out(p);
  out << "step";
  for (int i = 1; i <= n_prims; ++i) out << ",w_" << i;
  out << "\n";
  for (std::size_t t = 0; t < rec.steps.size(); ++t) {
    out << (t + 1);
    for (int i = 0; i < rec.steps[t].weights.size(); ++i) out << ',' << fmt(rec.steps[t].weights[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + p.string());
}

double min_obstacle_distance(const NavScenarioConfig& cfg, const TrajectoryRecord& rec) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : rec.steps)
    for (const auto& o : cfg.obstacles) best = std::min(best, (s.position - o).norm());
  return best;
}

}  // namespace

AppConfig load_config(const std::string& path) { return load_config_or_default(path); }

std::string dump_config(const AppConfig& cfg) { return config_to_json(cfg).dump(2); }

int run_plan(const PlanArgs& args) {
  try {
    const AppConfig cfg = load_config_or_default(args.config_path);
    if (args.horizon < 1) throw ConfigError("--horizon must be >= 1");
    fs::create_directories(args.out_dir);
    Manifest manifest(args.out_dir, "plan", cfg, cfg.rollout.seed);

    PhaseTimer build_timer;
    const NavScenario scn = build_scenario(cfg.scenario);
    manifest.set_timing("build_scenario", build_timer.elapsed());

    const auto feas = check_feasibility(scn.env, scn.gen, scn.prims);
    if (!feas.feasible) {
      std::cerr << "infeasible model: " << feas.summary() << "\n";
      for (const auto& v : feas.violations) std::cerr << "  " << v << "\n";
      return kExitConfig;
    }

    PhaseTimer plan_timer;
    std::optional<Plan> plan;
    try {
      plan.emplace(
          backward_recursion(scn.env, scn.gen, scn.costs, scn.prims, args.horizon, cfg.solver));
    } catch (const std::exception& e) {
      std::cerr << "planning failed: " << e.what() << "\n";
      return kExitSolver;
    }
    manifest.set_timing("backward_recursion", plan_timer.elapsed());

    const fs::path vpath = fs::path(args.out_dir) / "value_table.csv";
    auto vout = open_out(vpath);
    vout << "k,x_idx,value\n";
    for (int x = 0; x < scn.env.n_states(); ++x)
      for (int k = 1; k <= args.horizon + 1; ++k)
        vout << k << ',' << x << ',' << fmt(plan->values.at(k)[x]) << '\n';
    manifest.add_output(vpath);

    const fs::path wpath = fs::path(args.out_dir) / "weights_table.csv";
    auto wout = open_out(wpath);
    wout << "k,x_idx";
    for (int i = 1; i <= scn.prims.n_primitives(); ++i) wout << ",w_" << i;
    wout << "\n";
    for (int x = 0; x < scn.env.n_states(); ++x)
      for (int k = 1; k <= args.horizon; ++k) {
        wout << k << ',' << x;
        const auto& w = plan->policies.at(k, x);
        for (int i = 0; i < w.size(); ++i) wout << ',' << fmt(w[i]);
        wout << '\n';
      }
    manifest.add_output(wpath);

    manifest.complete();
    return kExitOk;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
}

int run_rollout(const RolloutArgs& args) {
  try {
    AppConfig cfg = load_config_or_default(args.config_path);
    if (!args.starts.empty()) cfg.rollout.starts = parse_starts(args.starts);
    if (args.seed_set) cfg.rollout.seed = args.seed;
    if (cfg.rollout.starts.empty()) throw ConfigError("no start positions given");
    if (args.primitive >= 4) throw ConfigError("--primitive must be 0..3");

    fs::create_directories(args.out_dir);
    Manifest manifest(args.out_dir, "rollout", cfg, cfg.rollout.seed);

    PhaseTimer build_timer;
    const NavScenario scn = build_scenario(cfg.scenario);
    const StepProblemFactory factory = scn.make_factory();
    manifest.set_timing("build_scenario", build_timer.elapsed());

    const auto feas = check_feasibility(scn.env, scn.gen, scn.prims);
    if (!feas.feasible) {
      std::cerr << "infeasible model: " << feas.summary() << "\n";
      return kExitConfig;
    }

    RolloutConfig rc;
    rc.max_steps = cfg.rollout.max_steps;
    rc.goal_radius = cfg.rollout.goal_radius;
    rc.idle_duration = cfg.rollout.idle_duration;
    rc.dt = cfg.scenario.dt;
    rc.seed = cfg.rollout.seed;
    rc.plant = cfg.rollout.plant;
    rc.goal = cfg.scenario.goal;

    std::vector<Start> starts;
    for (const auto& s : cfg.rollout.starts) starts.emplace_back(Eigen::Vector2d(s));

    auto make_controller = [&]() -> std::unique_ptr<Controller> {
      if (args.primitive >= 0)
        return std::make_unique<FixedPrimitiveController>(factory, scn.lookahead, args.primitive);
      return std::make_unique<GreedyController>(factory, scn.lookahead, cfg.solver);
    };

    PhaseTimer roll_timer;
    const auto records = batch_rollouts(scn.state_grid, scn.action_grid, scn.env, scn.costs,
                                        make_controller, starts, rc);
    manifest.set_timing("rollouts", roll_timer.elapsed());

    json summary;
    summary["rollouts"] = json::array();
    int reached = 0;
    bool solver_error = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      const fs::path tpath = fs::path(args.out_dir) / ("trajectory_" + std::to_string(i) + ".csv");
      write_trajectory_csv(tpath, rec, scn.prims.n_primitives());
      manifest.add_output(tpath);
      const fs::path wpath = fs::path(args.out_dir) / ("weights_" + std::to_string(i) + ".csv");
      write_weights_csv(wpath, rec, scn.prims.n_primitives());
      manifest.add_output(wpath);

      json r;
      r["start"] = {cfg.rollout.starts[i].x(), cfg.rollout.starts[i].y()};
      r["terminal_status"] = status_name(rec.status);
      r["steps"] = rec.step_count;
      r["min_obstacle_distance"] = min_obstacle_distance(cfg.scenario, rec);
      if (!rec.error.empty()) r["error"] = rec.error;
      summary["rollouts"].push_back(r);
      if (rec.status == TerminalStatus::GoalReached) ++reached;
      if (rec.status == TerminalStatus::Error) solver_error = true;
    }
    summary["goal_reached_count"] = reached;
    summary["rollout_count"] = records.size();

    const fs::path spath = fs::path(args.out_dir) / "summary.json";
    auto sout = open_out(spath);
    sout << summary.dump(2) << "\n";
    manifest.add_output(spath);

    manifest.complete();
    return solver_error ? kExitSolver : kExitOk;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
}

int run_heatmap(const HeatmapArgs& args) {
  AppConfig cfg;
  try {
    cfg = load_config_or_default(args.config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const fs::path out_path(args.out_file);
    const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    Manifest manifest(dir, "heatmap", cfg, 0,
                      out_path.filename().string() + ".manifest.json");
    const auto& s = cfg.scenario;
    const Grid grid({{s.x_min, s.x_max, s.state_bins_x}, {s.y_min, s.y_max, s.state_bins_y}});
    auto out = open_out(args.out_file);
    // Row-major, y descending: one row per y bin from top to bottom.
    for (int iy = s.state_bins_y - 1; iy >= 0; --iy) {
      for (int ix = 0; ix < s.state_bins_x; ++ix) {
        const Eigen::Vector2d pos(grid.center(0, ix), grid.center(1, iy));
        out << (ix ? "," : "") << fmt(state_cost(s, pos));
      }
      out << '\n';
    }
    if (!out) throw IoError("write failed: " + args.out_file);
    out.close();
    manifest.add_output(out_path);
    manifest.complete();
    return kExitOk;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
}

int run_oracle_check(const OracleArgs& args) {
  try {
    if (args.suite != "gradient" && args.suite != "convexity" && args.suite != "recursion" &&
        args.suite != "transcendence")
      throw ConfigError("unknown suite '" + args.suite + "'");
    Manifest manifest(".", "oracle-check " + args.suite, AppConfig{}, args.seed,
                      "oracle_check_manifest.json");
    const OracleSuiteResult res = run_oracle_suite(args.suite, args.seed);
    int failed = 0;
    for (std::size_t i = 0; i < res.cases.size(); ++i) {
      const auto& c = res.cases[i];
      if (!c.pass) ++failed;
      std::cout << (c.pass ? "pass" : "FAIL") << "  margin=" << c.margin << "  " << c.detail
                << "\n";
    }
    std::cout << "suite '" << res.suite << "': " << (res.cases.size() - failed) << "/"
              << res.cases.size() << " cases passed\n";
    if (!res.pass && res.failing_instance) {
      const char* dump_path = "oracle_failure.json";
      std::ofstream out(dump_path);
      out << *res.failing_instance << "\n";
      std::cout << "first failing instance written to " << dump_path << "\n";
    }
    manifest.complete();
    return res.pass ? kExitOk : kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace feg
