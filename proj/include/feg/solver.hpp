#pragma once

#include <utility>

#include "feg/step_problem.hpp"

namespace feg {

struct SolveOptions {
  double tol = 1e-8;    // Frank-Wolfe gap certificate threshold
  int max_iter = 5000;
};

struct SolveReport {
  Weights weights;
  double objective = 0.0;  // l_k(x): optimal value of the step problem
  double fw_gap = 0.0;     // max_j g(w)'(w - e_j); bounds J(w) - J* by convexity
  int iterations = 0;
  bool converged = false;
};

/// Minimizes the step objective over the simplex with entropic mirror
/// descent (exponentiated-gradient updates). Every primitive column sums
/// to 1, which makes the objective 1-relatively-smooth with respect to the
/// simplex negentropy, so unit step size is always admissible; backtracking
/// only moderates larger accelerated steps. Stops when the Frank-Wolfe gap
/// drops below `tol`.
SolveReport solve(const StepProblem& sp, const SolveOptions& opts = {});

/// Exhaustive minimum of the objective over the simplex lattice with the
/// given spacing. Test oracle; n_pi <= 4 only.
std::pair<Weights, double> brute_force_oracle(const StepProblem& sp, double grid_step);

}  // namespace feg
