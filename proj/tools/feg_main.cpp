#include <string>

#include "CLI11.hpp"
#include "feg/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Policy composition by variational free-energy gating"};
  app.require_subcommand(1);

  feg::PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Run the exact backward recursion and write the tables");
  plan->add_option("--config", plan_args.config_path, "Config file (JSON); defaults when omitted");
  plan->add_option("--horizon", plan_args.horizon, "Planning horizon N")->required();
  plan->add_option("--out", plan_args.out_dir, "Output directory");

  feg::RolloutArgs roll_args;
  auto* roll = app.add_subcommand("rollout", "Run closed-loop rollouts with the greedy controller");
  roll->add_option("--config", roll_args.config_path, "Config file (JSON); defaults when omitted");
  roll->add_option("--starts", roll_args.starts, "Start positions, 'px,py;px,py;...'");
  auto* seed_opt = roll->add_option("--seed", roll_args.seed, "Seed overriding the config");
  roll->add_option("--out", roll_args.out_dir, "Output directory");
  roll->add_option("--primitive", roll_args.primitive,
                   "Roll out a single primitive (0..3) instead of the gated policy");

  feg::HeatmapArgs heat_args;
  auto* heat = app.add_subcommand("heatmap", "Write the state-cost table as CSV");
  heat->add_option("--config", heat_args.config_path, "Config file (JSON); defaults when omitted");
  heat->add_option("--out", heat_args.out_file, "Output CSV path");

  feg::OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-check", "Run an oracle verification suite");
  oracle->add_option("--suite", oracle_args.suite, "gradient | convexity | recursion | transcendence")
      ->required();
  oracle->add_option("--seed", oracle_args.seed, "Suite RNG seed");

  CLI11_PARSE(app, argc, argv);

  if (plan->parsed()) return feg::run_plan(plan_args);
  if (roll->parsed()) {
    roll_args.seed_set = seed_opt->count() > 0;
    return feg::run_rollout(roll_args);
  }
  if (heat->parsed()) return feg::run_heatmap(heat_args);
  if (oracle->parsed()) return feg::run_oracle_check(oracle_args);
  return feg::kExitConfig;
}
