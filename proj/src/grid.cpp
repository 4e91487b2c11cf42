#include "feg/grid.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace feg {

namespace {

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  // FNV-1a style mix
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t bits_of(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof(u));
  return u;
}

}  // namespace

Grid::Grid(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("Grid: no axes");
  flat_size_ = 1;
  id_ = 0xcbf29ce484222325ULL;
  for (const auto& a : axes_) {
    if (a.bins < 1) throw std::invalid_argument("Grid: bins must be >= 1");
    if (!(a.lo < a.hi)) throw std::invalid_argument("Grid: bounds must be strictly ordered");
    widths_.push_back((a.hi - a.lo) / a.bins);
    flat_size_ *= a.bins;
    id_ = hash_combine(id_, bits_of(a.lo));
    id_ = hash_combine(id_, bits_of(a.hi));
    id_ = hash_combine(id_, static_cast<std::uint64_t>(a.bins));
  }
  strides_.assign(axes_.size(), 1);
  for (int a = ndim() - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * axes_[a + 1].bins;
}

int Grid::flatten(std::span<const int> multi) const {
  if (static_cast<int>(multi.size()) != ndim())
    throw std::invalid_argument("Grid::flatten: dimension mismatch");
  int flat = 0;
  for (int a = 0; a < ndim(); ++a) {
    if (multi[a] < 0 || multi[a] >= axes_[a].bins)
      throw std::out_of_range("Grid::flatten: index out of range");
    flat += multi[a] * strides_[a];
  }
  return flat;
}

void Grid::unflatten(int flat, std::span<int> out) const {
  if (flat < 0 || flat >= flat_size_) throw std::out_of_range("Grid::unflatten: bad flat index");
  for (int a = 0; a < ndim(); ++a) {
    out[a] = flat / strides_[a];
    flat -= out[a] * strides_[a];
  }
}

void Grid::point(int flat, std::span<double> out) const {
  if (flat < 0 || flat >= flat_size_) throw std::out_of_range("Grid::point: bad flat index");
  for (int a = 0; a < ndim(); ++a) {
    const int idx = (flat / strides_[a]) % axes_[a].bins;
    out[a] = center(a, idx);
  }
}

std::vector<double> Grid::point(int flat) const {
  std::vector<double> out(ndim());
  point(flat, out);
  return out;
}

int Grid::locate(std::span<const double> coords) const {
  if (static_cast<int>(coords.size()) != ndim())
    throw std::invalid_argument("Grid::locate: dimension mismatch");
  int flat = 0;
  for (int a = 0; a < ndim(); ++a) {
    int i = static_cast<int>(std::floor((coords[a] - axes_[a].lo) / widths_[a]));
    if (i < 0) i = 0;
    if (i >= axes_[a].bins) i = axes_[a].bins - 1;
    flat += i * strides_[a];
  }
  return flat;
}

}  // namespace feg
