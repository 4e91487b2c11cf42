#pragma once

#include <optional>
#include <string>
#include <vector>

#include "feg/planner.hpp"
#include "feg/rng.hpp"

namespace feg {

/// Random dense step problem with full-support columns. Shapes are drawn
/// from [2, max_prims] x [4, max_actions]; scores are moderate so interior
/// optima are common.
StepProblem random_step_problem(RngStream& rng, int max_actions = 49, int max_prims = 4);

/// Random interior simplex point with entries bounded away from zero.
Weights random_interior_weights(RngStream& rng, int n);

/// Tiny synthetic planning instance for enumeration checks.
struct TinyInstance {
  Grid state_grid;
  Grid action_grid;
  EnvironmentKernel env;
  GenerativeModel gen;
  CostModel costs;
  PrimitiveSet prims;
};
TinyInstance random_tiny_instance(RngStream& rng, int n_states = 3, int n_actions = 2,
                                  int n_prims = 2);

/// Enumeration reference for the backward recursion: per (k, x), minimize
/// over a simplex lattice (n_pi = 2 only), recursing with the lattice's own
/// continuation values. Returns the lattice total free energy and a sound
/// upper bound on its excess over the true optimum.
struct EnumerationResult {
  double total_free_energy;
  double resolution_bound;  // sum_k max_x (1/2) c_kx (step/2)^2
};
EnumerationResult enumerate_recursion(const TinyInstance& inst, int horizon, int lattice_points);

struct OracleCase {
  bool pass = true;
  double margin = 0.0;  // distance to the failing threshold; negative = fail
  std::string detail;
};

struct OracleSuiteResult {
  std::string suite;
  bool pass = true;
  std::vector<OracleCase> cases;
  // Serialized failing instance (JSON) for replay, present on failure.
  std::optional<std::string> failing_instance;
};

/// suite in {gradient, convexity, recursion, transcendence}.
OracleSuiteResult run_oracle_suite(const std::string& suite, std::uint64_t seed);

/// Serialize a step problem for replay / bug reports.
std::string serialize_step_problem(const StepProblem& sp);

}  // namespace feg
