#include "feg/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace feg {

namespace {

// Normalize log-weights in place and return the weight vector.
Eigen::VectorXd exp_normalized(Eigen::VectorXd& logw) {
  logw.array() -= logw.maxCoeff();
  Eigen::VectorXd w = logw.array().exp();
  const double z = w.sum();
  w /= z;
  logw.array() -= std::log(z);
  return w;
}

double fw_gap_at(const StepProblem& sp, const Eigen::VectorXd& w) {
  const Eigen::VectorXd g = detail::gradient_raw(sp, w);
  return g.dot(w) - g.minCoeff();
}

// Equality-constrained Newton on one face of the simplex: weights outside
// `support` are pinned at zero, the rest solve the KKT system
// [H 1; 1' 0] [dw; nu] = [-g; 0]. Returns the face-stationary point, or
// nothing if the iteration breaks down.
std::optional<Eigen::VectorXd> newton_on_face(const StepProblem& sp,
                                              const std::vector<int>& support,
                                              const Eigen::VectorXd& w_start) {
  const int n = sp.n_primitives();
  const int m = static_cast<int>(support.size());

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  double mass = 0.0;
  for (int i : support) mass += w_start[i];
  if (mass > 1e-12) {
    for (int i : support) w[i] = w_start[i] / mass;
  } else {
    for (int i : support) w[i] = 1.0 / m;
  }
  if (m == 1) return w;

  double J = detail::objective_raw(sp, w);
  for (int it = 0; it < 60; ++it) {
    // a collapsing coordinate means the optimum lives on a smaller face;
    // that face's own attempt will certify it
    for (int i : support)
      if (w[i] < 1e-14) return std::nullopt;
    w /= w.sum();
    const Eigen::VectorXd g = detail::gradient_raw(sp, w);
    const Eigen::MatrixXd h = hessian(sp, Weights(w));

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) kkt(a, b) = h(support[a], support[b]);
      kkt(a, m) = kkt(m, a) = 1.0;
      rhs[a] = -g[support[a]];
    }
    rhs[m] = 0.0;

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd sol = lu.solve(rhs);
    Eigen::VectorXd dw = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < m; ++a) dw[support[a]] = sol[a];
    if (!dw.allFinite()) return std::nullopt;
    if (dw.cwiseAbs().maxCoeff() <= 1e-15) break;

    // keep strictly inside the face, then back off until J does not grow
    double t = 1.0;
    for (int i : support)
      if (dw[i] < 0.0) t = std::min(t, -0.999 * w[i] / dw[i]);
    bool accepted = false;
    for (int back = 0; back < 40; ++back) {
      const Eigen::VectorXd w_next = (w + t * dw).cwiseMax(0.0);
      const double J_next = detail::objective_raw(sp, w_next);
      if (J_next <= J + 1e-12 * (1.0 + std::abs(J))) {
        w = w_next;
        J = J_next;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return w;
}

// Try every face of the simplex and keep the first point whose full-simplex
// Frank-Wolfe gap certifies optimality.
std::optional<Eigen::VectorXd> polish(const StepProblem& sp, const Eigen::VectorXd& w_eg,
                                      double tol) {
  const int n = sp.n_primitives();
  // supports ordered by size (largest first), each encoded as a bit mask
  std::vector<unsigned> masks;
  for (unsigned m = 1; m < (1u << n); ++m) masks.push_back(m);
  std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    return __builtin_popcount(a) > __builtin_popcount(b);
  });
  for (unsigned mask : masks) {
    std::vector<int> support;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) support.push_back(i);
    const auto w = newton_on_face(sp, support, w_eg);
    if (!w) continue;
    if (fw_gap_at(sp, *w) <= tol) return w;
  }
  return std::nullopt;
}

}  // namespace

SolveReport solve(const StepProblem& sp, const SolveOptions& opts) {
  const int n = sp.n_primitives();
  if (n < 1) throw std::invalid_argument("solve: empty primitive set");

  // The d(u) offset shifts J by a constant and leaves gradient differences
  // (hence the gap and the argmin) untouched; solving with shifted scores
  // keeps line-search comparisons well conditioned when costs are large.
  StepProblem shifted = sp;
  const double offset = sp.action_score.minCoeff();
  shifted.action_score.array() -= offset;

  if (n == 1) {
    SolveReport rep{Weights::basis(1, 0), detail::objective_raw(shifted, Eigen::VectorXd::Ones(1)),
                    0.0, 0, true};
    rep.objective += offset;
    return rep;
  }

  Eigen::VectorXd logw = Eigen::VectorXd::Constant(n, -std::log(double(n)));
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  double J = detail::objective_raw(shifted, w);
  double eta = 1.0;
  double gap = 0.0;
  int it = 0;
  bool converged = false;

  for (; it < opts.max_iter; ++it) {
    const Eigen::VectorXd g = detail::gradient_raw(shifted, w);
    gap = g.dot(w) - g.minCoeff();
    if (gap <= opts.tol) {
      converged = true;
      break;
    }

    // Entropic mirror descent stalls when the optimum sits on a face that
    // the multiplicative update only approaches exponentially slowly; an
    // active-face Newton step finishes the job and the full-simplex gap
    // certifies it.
    if (it > 0 && it % 50 == 0) {
      if (const auto wp = polish(shifted, w, opts.tol)) {
        w = *wp;
        gap = fw_gap_at(shifted, w);
        J = detail::objective_raw(shifted, w);
        converged = true;
        break;
      }
    }

    const double slack = 1e-12 * (1.0 + std::abs(J));
    while (true) {
      Eigen::VectorXd logw_next = logw - eta * g;
      Eigen::VectorXd w_next = exp_normalized(logw_next);
      const double J_next = detail::objective_raw(shifted, w_next);
      if (J_next < J - slack) {
        // measurable progress: accept and accelerate
        logw = std::move(logw_next);
        w = std::move(w_next);
        J = J_next;
        eta = std::min(eta * 1.5, 1e6);
        break;
      }
      if (eta <= 1.0) {
        // unit step is safe by relative smoothness; any measured increase
        // is fp noise
        logw = std::move(logw_next);
        w = std::move(w_next);
        J = J_next;
        break;
      }
      eta = std::max(eta * 0.5, 1.0);
    }
  }

  if (!converged) {
    if (const auto wp = polish(shifted, w, opts.tol)) {
      w = *wp;
      gap = fw_gap_at(shifted, w);
      converged = true;
    }
  }

  SolveReport rep{Weights(w), detail::objective_raw(shifted, w) + offset, gap, it, converged};
  return rep;
}

std::pair<Weights, double> brute_force_oracle(const StepProblem& sp, double grid_step) {
  const int n = sp.n_primitives();
  if (n > 4) throw std::invalid_argument("brute_force_oracle: n_pi > 4");
  if (!(grid_step > 0.0) || grid_step > 1.0)
    throw std::invalid_argument("brute_force_oracle: bad grid step");
  const int m = static_cast<int>(std::lround(1.0 / grid_step));

  Eigen::VectorXd best;
  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd w(n);
  // Enumerate compositions k_1 + ... + k_n = m in lexicographic order.
  std::vector<int> comp(n, 0);
  comp[0] = m;
  while (true) {
    for (int i = 0; i < n; ++i) w[i] = static_cast<double>(comp[i]) / m;
    const double val = detail::objective_raw(sp, w);
    if (val < best_val) {
      best_val = val;
      best = w;
    }
    // next composition
    int i = n - 2;
    while (i >= 0 && comp[i] == 0) --i;
    if (i < 0) break;
    --comp[i];
    int rest = m;
    for (int j = 0; j <= i; ++j) rest -= comp[j];
    comp[i + 1] = rest;
    for (int j = i + 2; j < n; ++j) comp[j] = 0;
  }
  return {Weights(best), best_val};
}

}  // namespace feg
