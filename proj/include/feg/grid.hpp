#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace feg {

/// One axis of a rectangular grid: [lo, hi) cut into `bins` equal cells.
struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 1;
};

/// Rectangular grid of equidistant bins. Immutable after construction.
///
/// Bin i on an axis covers [lo + i*w, lo + (i+1)*w) with w = (hi-lo)/bins;
/// its center is lo + (i+0.5)*w. Flat indices are row-major with the last
/// axis fastest.
class Grid {
 public:
  explicit Grid(std::vector<AxisSpec> axes);

  int ndim() const { return static_cast<int>(axes_.size()); }
  int flat_size() const { return flat_size_; }
  const AxisSpec& axis(int a) const { return axes_[a]; }
  double width(int a) const { return widths_[a]; }
  double center(int a, int i) const { return axes_[a].lo + (i + 0.5) * widths_[a]; }

  /// Flat index of a multi-index.
  int flatten(std::span<const int> multi) const;
  /// Multi-index of a flat index; `out` must have ndim() entries.
  void unflatten(int flat, std::span<int> out) const;
  /// Bin-center coordinates of a flat index; `out` must have ndim() entries.
  void point(int flat, std::span<double> out) const;
  std::vector<double> point(int flat) const;

  /// Flat index of the bin containing `coords`, clamped to the grid.
  int locate(std::span<const double> coords) const;

  /// Identity token derived from the axis specs; distributions carry it so
  /// mixed-grid operations can be rejected.
  std::uint64_t id() const { return id_; }

  bool operator==(const Grid& other) const { return id_ == other.id_; }

 private:
  std::vector<AxisSpec> axes_;
  std::vector<double> widths_;
  std::vector<int> strides_;
  int flat_size_;
  std::uint64_t id_;
};

}  // namespace feg
