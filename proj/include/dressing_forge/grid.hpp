#ifndef DRESSING_FORGE_GRID_HPP
#define DRESSING_FORGE_GRID_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "dressing_forge/algebra.hpp"

namespace dressing_forge {

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int points = 2;

  double spacing() const { return (max - min) / double(points - 1); }
  double node(int i) const { return i == points - 1 ? max : min + spacing() * i; }
};

/// Tensor product of uniform per-axis partitions; the first axis varies slowest.
class Grid {
 public:
  Grid() = default;

  explicit Grid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) fail(ErrorKind::InvalidArgument, "grid needs at least one axis");
    for (const auto& a : axes_) {
      if (a.points < 2 || !(a.max > a.min)) fail(ErrorKind::InvalidArgument, "grid axis needs >= 2 points and min < max");
    }
  }

  /// Same [min, max] on every axis.
  static Grid uniform(int n, double min, double max, int points) {
    return Grid(std::vector<GridAxis>(static_cast<std::size_t>(n), GridAxis{min, max, points}));
  }

  int n() const noexcept { return static_cast<int>(axes_.size()); }
  const GridAxis& axis(int k) const { return axes_.at(static_cast<std::size_t>(k)); }
  const std::vector<GridAxis>& axes() const noexcept { return axes_; }

  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& a : axes_) s *= static_cast<std::size_t>(a.points);
    return s;
  }

  std::size_t stride(int k) const {
    std::size_t s = 1;
    for (int j = n() - 1; j > k; --j) s *= static_cast<std::size_t>(axis(j).points);
    return s;
  }

  std::vector<int> multi_index(std::size_t flat) const {
    std::vector<int> idx(static_cast<std::size_t>(n()));
    for (int k = n() - 1; k >= 0; --k) {
      const auto p = static_cast<std::size_t>(axis(k).points);
      idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % p);
      flat /= p;
    }
    return idx;
  }

  std::size_t flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int k = 0; k < n(); ++k) flat = flat * static_cast<std::size_t>(axis(k).points) + static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
    return flat;
  }

  RVector point(std::size_t flat) const {
    const auto idx = multi_index(flat);
    RVector u(n());
    for (int k = 0; k < n(); ++k) u(k) = axis(k).node(idx[static_cast<std::size_t>(k)]);
    return u;
  }

  /// Same extents with (points - 1) * factor + 1 points per axis.
  Grid refined(int factor = 2) const {
    auto axes = axes_;
    for (auto& a : axes) a.points = (a.points - 1) * factor + 1;
    return Grid(std::move(axes));
  }

 private:
  std::vector<GridAxis> axes_;
};

/// Egoroff metric fields sampled on a grid. Complex storage so that
/// intermediate tau-only dressings can be represented; h, phi and beta are
/// real for sigma-compatible chains.
struct EgoroffMetric {
  Grid grid;
  std::vector<CVector> h;
  std::vector<cd> phi;
  std::vector<CMatrix> beta;
  /// Grid points where some h_i is not a positive real.
  std::size_t nonpositive_points = 0;
};

/// X(., lambda) sampled on a grid.
struct ImmersionSample {
  cd lambda;
  Grid grid;
  std::vector<CVector> X;
};

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_GRID_HPP
