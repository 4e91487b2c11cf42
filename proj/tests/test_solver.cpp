#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "feg/oracle_checks.hpp"
#include "feg/solver.hpp"

using namespace feg;

TEST_SUITE_BEGIN("solver");

TEST_CASE("singleton simplex is solved in zero iterations") {
  Eigen::VectorXd rho(3);
  rho << 0.5, 0.3, 0.2;
  StepProblem sp;
  sp.prim_matrix = rho;
  sp.ref_policy = rho;
  sp.action_score = Eigen::VectorXd::Constant(3, 2.0);
  const SolveReport rep = solve(sp);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.weights[0] == 1.0);
  CHECK(rep.objective == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("softmax-optimal primitive takes all the weight") {
  RngStream rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int nu = 4 + static_cast<int>(rng.uniform01() * 12);
    Eigen::VectorXd rho(nu), other(nu), d(nu);
    for (int u = 0; u < nu; ++u) {
      rho[u] = 0.2 + rng.uniform01();
      other[u] = 0.2 + rng.uniform01();
      d[u] = 2.0 * rng.uniform01();
    }
    rho /= rho.sum();
    other /= other.sum();
    // pi~ = rho e^{-d} / Z minimizes KL(m||rho) + <m, d> over all pmfs, so
    // putting it in the dictionary makes e1 the unique optimum.
    Eigen::VectorXd tilted = (rho.array() * (-d.array()).exp()).matrix();
    const double z = tilted.sum();
    tilted /= z;

    StepProblem sp;
    sp.prim_matrix.resize(nu, 2);
    sp.prim_matrix.col(0) = tilted;
    sp.prim_matrix.col(1) = other;
    sp.ref_policy = rho;
    sp.action_score = d;
    const SolveReport rep = solve(sp);
    CHECK(rep.converged);
    CHECK(rep.fw_gap <= 1e-8);
    // the gradient flattens at this vertex (it is the unconstrained optimum),
    // so the gap certifies J long before w pins to e1 exactly
    CHECK(rep.weights[0] >= 1.0 - 1e-3);
    CHECK(rep.objective == doctest::Approx(-std::log(z)).epsilon(1e-7));
  }
}

TEST_CASE("random instances beat the lattice oracle and certify the gap") {
  RngStream rng(505);
  for (int trial = 0; trial < 50; ++trial) {
    const StepProblem sp = random_step_problem(rng, 20, 3);
    const SolveReport rep = solve(sp);
    CHECK(rep.converged);
    CHECK(rep.fw_gap <= 1e-8);
    const auto [w_lat, val_lat] = brute_force_oracle(sp, 0.01);
    // the lattice minimum can only exceed the true one
    CHECK(rep.objective <= val_lat + 1e-5);
    // certificate: J(w*) - J* <= gap, and the lattice point nearest w* bounds
    // J_lat from above
    CHECK(val_lat >= rep.objective - rep.fw_gap - 1e-12);
  }
}

TEST_CASE("brute force oracle") {
  SUBCASE("singleton") {
    Eigen::VectorXd rho(2);
    rho << 0.6, 0.4;
    StepProblem sp;
    sp.prim_matrix = rho;
    sp.ref_policy = rho;
    sp.action_score = Eigen::VectorXd::Zero(2);
    const auto [w, val] = brute_force_oracle(sp, 0.01);
    CHECK(w[0] == 1.0);
    CHECK(val == doctest::Approx(0.0));
  }

  SUBCASE("flat objective returns the first lattice point") {
    Eigen::VectorXd rho(3);
    rho << 0.5, 0.25, 0.25;
    StepProblem sp;
    sp.prim_matrix.resize(3, 2);
    sp.prim_matrix.col(0) = rho;
    sp.prim_matrix.col(1) = rho;
    sp.ref_policy = rho;
    sp.action_score = Eigen::VectorXd::Zero(3);
    const auto [w, val] = brute_force_oracle(sp, 0.25);
    CHECK(w[0] == 1.0);  // enumeration starts at e1
    CHECK(val == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("too many primitives") {
    StepProblem sp;
    sp.prim_matrix = Eigen::MatrixXd::Constant(4, 5, 0.25);
    sp.ref_policy = Eigen::VectorXd::Constant(4, 0.25);
    sp.action_score = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(brute_force_oracle(sp, 0.1), std::invalid_argument);
  }
}

TEST_CASE("flat directions converge immediately from the barycenter") {
  Eigen::VectorXd rho(4);
  rho << 0.4, 0.1, 0.3, 0.2;
  StepProblem sp;
  sp.prim_matrix.resize(4, 3);
  sp.prim_matrix.col(0) = rho;
  sp.prim_matrix.col(1) = rho;
  sp.prim_matrix.col(2) = rho;
  sp.ref_policy = rho;
  sp.action_score = Eigen::VectorXd::Constant(4, 1.0);
  const SolveReport rep = solve(sp);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);  // equal gradient entries: zero gap at the barycenter
  CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transcendence: interior optima strictly beat every vertex") {
  RngStream rng(606);
  int interior_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const StepProblem sp = random_step_problem(rng);
    const int n = sp.n_primitives();
    const SolveReport rep = solve(sp);
    REQUIRE(rep.converged);
    int positive = 0;
    for (int i = 0; i < n; ++i)
      if (rep.weights[i] > 1e-6) ++positive;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sp.prim_matrix);
    qr.setThreshold(1e-10);
    if (positive < 2 || static_cast<int>(qr.rank()) != n) continue;
    ++interior_seen;
    double best_vertex = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      best_vertex = std::min(best_vertex, objective(sp, Weights::basis(n, i)));
    CHECK(rep.objective < best_vertex - 1e-9);
  }
  CHECK(interior_seen >= 10);
}

TEST_CASE("midpoint convexity holds on random triples") {
  RngStream rng(707);
  for (int trial = 0; trial < 20; ++trial) {
    const StepProblem sp = random_step_problem(rng);
    for (int t = 0; t < 500; ++t) {
      const Weights a = random_interior_weights(rng, sp.n_primitives());
      const Weights b = random_interior_weights(rng, sp.n_primitives());
      const double alpha = rng.uniform01();
      const Eigen::VectorXd mid = alpha * a.vec() + (1.0 - alpha) * b.vec();
      CHECK(detail::objective_raw(sp, mid) <=
            alpha * objective(sp, a) + (1.0 - alpha) * objective(sp, b) + 1e-10);
    }
  }
}

TEST_SUITE_END();
