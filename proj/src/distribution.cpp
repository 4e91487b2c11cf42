#include "feg/distribution.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace feg {

namespace {

Eigen::VectorXd floor_and_normalize(Eigen::VectorXd v, double floor) {
  if (floor < 0.0) throw std::invalid_argument("FiniteDistribution: negative floor");
  const double sum = v.sum();
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw std::invalid_argument("FiniteDistribution: weights must have positive finite sum");
  v /= sum;
  if (floor > 0.0) {
    v = v.cwiseMax(floor);
    v /= v.sum();
  }
  return v;
}

// Mass of N(mu, sigma^2) over [a, b].
double gauss_bin_mass(double a, double b, double mu, double sigma) {
  const double inv = 1.0 / (sigma * std::numbers::sqrt2);
  return 0.5 * (std::erf((b - mu) * inv) - std::erf((a - mu) * inv));
}

}  // namespace

FiniteDistribution FiniteDistribution::from_weights(const Grid& grid, Eigen::VectorXd weights,
                                                    double floor) {
  if (static_cast<int>(weights.size()) != grid.flat_size())
    throw std::invalid_argument("FiniteDistribution: weight vector does not match grid");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("FiniteDistribution: negative weight");
  return FiniteDistribution(floor_and_normalize(std::move(weights), floor), grid.id(), floor);
}

FiniteDistribution FiniteDistribution::point_mass(const Grid& grid, int index) {
  if (index < 0 || index >= grid.flat_size())
    throw std::out_of_range("FiniteDistribution::point_mass: bad index");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.flat_size());
  v[index] = 1.0;
  return FiniteDistribution(std::move(v), grid.id(), 0.0);
}

FiniteDistribution FiniteDistribution::uniform(const Grid& grid) {
  const int n = grid.flat_size();
  return FiniteDistribution(Eigen::VectorXd::Constant(n, 1.0 / n), grid.id(), 1.0 / n);
}

FiniteDistribution FiniteDistribution::on_same_grid(const FiniteDistribution& like,
                                                    Eigen::VectorXd weights, double floor) {
  if (weights.size() != like.probs().size())
    throw std::invalid_argument("FiniteDistribution::on_same_grid: length mismatch");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("FiniteDistribution::on_same_grid: negative weight");
  return FiniteDistribution(floor_and_normalize(std::move(weights), floor), like.grid_id(), floor);
}

int FiniteDistribution::mode() const {
  int best = 0;
  for (int i = 1; i < size(); ++i)
    if (probs_[i] > probs_[best]) best = i;
  return best;
}

namespace detail {

Eigen::VectorXd gaussian_axis_masses(const Grid& grid, int axis, double mean, double var) {
  if (!(var > 0.0)) throw std::invalid_argument("gaussian_axis_masses: variance must be positive");
  const auto& ax = grid.axis(axis);
  const double w = grid.width(axis);
  const double sigma = std::sqrt(var);
  Eigen::VectorXd mass(ax.bins);
  for (int i = 0; i < ax.bins; ++i) {
    const double lo = ax.lo + i * w;
    mass[i] = gauss_bin_mass(lo, lo + w, mean, sigma);
  }
  return mass;
}

}  // namespace detail

FiniteDistribution discretize_gaussian(const Grid& grid, const Eigen::VectorXd& mean,
                                       const Eigen::VectorXd& var_diag, double floor) {
  const int nd = grid.ndim();
  if (static_cast<int>(mean.size()) != nd || static_cast<int>(var_diag.size()) != nd)
    throw std::invalid_argument("discretize_gaussian: mean/variance dimension mismatch");

  // Per-axis bin masses, then the product across axes per flat index.
  std::vector<Eigen::VectorXd> axis_mass(nd);
  for (int a = 0; a < nd; ++a)
    axis_mass[a] = detail::gaussian_axis_masses(grid, a, mean[a], var_diag[a]);
  Eigen::VectorXd joint = Eigen::VectorXd::Ones(grid.flat_size());
  std::vector<int> multi(nd);
  for (int f = 0; f < grid.flat_size(); ++f) {
    grid.unflatten(f, multi);
    for (int a = 0; a < nd; ++a) joint[f] *= axis_mass[a][multi[a]];
  }
  const double total = joint.sum();
  if (!(total > 0.0)) {
    if (floor > 0.0) joint.setOnes();  // all mass off-grid: the floor takes over
    else
      throw std::invalid_argument("discretize_gaussian: no probability mass on the grid");
  }
  return FiniteDistribution::from_weights(grid, std::move(joint), floor);
}

double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (!p.same_grid(q)) throw std::invalid_argument("kl_divergence: distributions on different grids");
  double acc = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi <= 0.0) continue;  // 0 ln 0 = 0
    const double qi = q[i];
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    acc += pi * std::log(pi / qi);
  }
  return acc;
}

double entropy(const FiniteDistribution& p) {
  double acc = 0.0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) acc -= p[i] * std::log(p[i]);
  return acc;
}

double expectation(const FiniteDistribution& p, const Eigen::VectorXd& values) {
  if (values.size() != p.probs().size())
    throw std::invalid_argument("expectation: value vector length mismatch");
  return p.probs().dot(values);
}

}  // namespace feg
