#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "feg/grid.hpp"

namespace feg {

/// Probability mass function over the flat indices of a Grid.
///
/// Entries are non-negative and sum to 1 (within fp rounding of the
/// normalization). A positive `floor` passed at construction is applied
/// before the final normalization, so every entry is at least
/// floor / (1 + flat_size * floor) and the pmf has full support.
class FiniteDistribution {
 public:
  /// Normalize `weights` into a pmf. Throws on negative entries or zero sum.
  static FiniteDistribution from_weights(const Grid& grid, Eigen::VectorXd weights,
                                         double floor = 0.0);
  static FiniteDistribution point_mass(const Grid& grid, int index);
  static FiniteDistribution uniform(const Grid& grid);
  /// Normalize `weights` into a pmf on the same grid as `like`.
  static FiniteDistribution on_same_grid(const FiniteDistribution& like, Eigen::VectorXd weights,
                                         double floor = 0.0);

  const Eigen::VectorXd& probs() const { return probs_; }
  double operator[](int i) const { return probs_[i]; }
  int size() const { return static_cast<int>(probs_.size()); }
  std::uint64_t grid_id() const { return grid_id_; }
  double floor() const { return floor_; }

  /// Index of the largest entry (first on ties).
  int mode() const;

  bool same_grid(const FiniteDistribution& other) const { return grid_id_ == other.grid_id_; }

 private:
  FiniteDistribution(Eigen::VectorXd probs, std::uint64_t grid_id, double floor)
      : probs_(std::move(probs)), grid_id_(grid_id), floor_(floor) {}

  Eigen::VectorXd probs_;
  std::uint64_t grid_id_;
  double floor_;
};

/// Pmf of a Gaussian with diagonal covariance on `grid`: exact per-bin mass
/// (per-axis erf integrals, multiplied across axes), floored at `floor` and
/// renormalized. The mean may lie outside the grid.
FiniteDistribution discretize_gaussian(const Grid& grid, const Eigen::VectorXd& mean,
                                       const Eigen::VectorXd& var_diag, double floor);

namespace detail {
/// Per-bin masses of N(mean, var) along one grid axis; the building block of
/// discretize_gaussian, exposed so batch constructions can cache it per axis
/// and still reproduce discretize_gaussian bit for bit.
Eigen::VectorXd gaussian_axis_masses(const Grid& grid, int axis, double mean, double var);
}  // namespace detail

/// KL(p || q) in nats with the 0 ln 0 = 0 convention. Returns +infinity when
/// p has mass where q has none. Throws if the grids differ.
double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q);

/// Shannon entropy in nats.
double entropy(const FiniteDistribution& p);

/// E_p[values]. Throws on length mismatch.
double expectation(const FiniteDistribution& p, const Eigen::VectorXd& values);

}  // namespace feg
