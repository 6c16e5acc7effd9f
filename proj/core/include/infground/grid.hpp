#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "infground/geometry.hpp"

namespace infground {

/// One real value per grid node, row-major with x fastest.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::size_t nx, std::size_t ny, double value = 0.0)
      : nx_(nx), ny_(ny), values_(nx * ny, value) {}

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& at(std::size_t i, std::size_t j) { return values_[j * nx_ + i]; }
  double at(std::size_t i, std::size_t j) const { return values_[j * nx_ + i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double max() const;
  ScalarField scaled(double c) const;

  bool operator==(const ScalarField&) const = default;

 private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> values_;
};

/// Stencil directions. Opposite directions are adjacent pairs (0,1), (2,3), ...
/// The first four are the axis directions.
inline constexpr std::array<std::array<int, 2>, 8> kDirections{{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {-1, 1}, {1, -1}}};

struct GridOptions {
  double h = 0.0;
  double padding = -1.0;    ///< negative: 2h
  double ridge_tol = -1.0;  ///< negative: h/2
  std::size_t node_budget = 4'000'000;
};

/// Uniform Cartesian grid carrying a rasterized domain.
///
/// Node (i, j) sits at (shift.x + (i0 + i) h, shift.y + (j0 + j) h). Rasterized
/// grids use zero shift and integer offsets, which makes grids of mirror-
/// symmetric domains exactly mirror-symmetric in floating point.
///
/// For each inside node and each of the eight stencil directions the grid
/// stores the ray length to the next stencil point: the full step when the
/// neighbour is inside, the bisected distance to the boundary when it is
/// outside, and NaN when the neighbour is off the grid.
class GridDomain {
 public:
  /// Grid from an explicit inside mask (no membership predicate). Boundary
  /// crossings are placed at the outside neighbour nodes.
  static GridDomain from_mask(std::size_t nx, std::size_t ny, double h, Point origin,
                              std::vector<std::uint8_t> inside, double ridge_tol = -1.0);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  double h() const { return h_; }
  double ridge_tol() const { return ridge_tol_; }

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  std::size_t col(std::size_t k) const { return k % nx_; }
  std::size_t row(std::size_t k) const { return k / nx_; }
  double x(std::size_t i) const { return shift_.x + static_cast<double>(i0_ + static_cast<long>(i)) * h_; }
  double y(std::size_t j) const { return shift_.y + static_cast<double>(j0_ + static_cast<long>(j)) * h_; }
  Point node(std::size_t k) const { return {x(col(k)), y(row(k))}; }

  /// Fractional node coordinates of a point (may be outside [0, n-1]).
  double fx(double px) const;
  double fy(double py) const;

  bool inside(std::size_t k) const { return inside_[k] != 0; }
  std::span<const std::uint8_t> inside_mask() const { return inside_; }
  std::size_t inside_count() const { return inside_count_; }

  const ScalarField& dist() const { return dist_; }
  std::span<const std::size_t> ridge() const { return ridge_; }

  /// Ray length from inside node `k` along direction `d`; NaN if the
  /// neighbour is off the grid.
  double ray(std::size_t k, int d) const { return rays_[k][static_cast<std::size_t>(d)]; }
  /// Neighbour index along `d`, or -1 when off the grid.
  long neighbor(std::size_t k, int d) const;

  const std::optional<DomainSpec>& spec() const { return spec_; }

  /// Boundary crossing points found along stencil rays.
  const std::vector<Point>& boundary_samples() const { return samples_; }

  /// Index of the inside node nearest to `p` (ties: lowest index), or -1 if
  /// the grid has no inside node.
  long nearest_inside_node(Point p) const;

  /// Index of the mirror image of node k under x -> -x, or -1.
  long mirror_x(std::size_t k) const;

 private:
  friend GridDomain rasterize(const DomainSpec& spec, const GridOptions& options);
  GridDomain() = default;
  void finish();

  std::size_t nx_ = 0, ny_ = 0;
  double h_ = 0.0;
  long i0_ = 0, j0_ = 0;
  Point shift_{};
  double ridge_tol_ = 0.0;
  std::vector<std::uint8_t> inside_;
  std::size_t inside_count_ = 0;
  std::vector<std::array<double, 8>> rays_;
  std::vector<Point> samples_;
  ScalarField dist_;
  std::vector<std::size_t> ridge_;
  std::optional<DomainSpec> spec_;
};

/// Rasterizes `spec` onto a grid covering its bounding box plus padding.
/// Throws InvalidParameter for bad h/padding and ResourceError when the node
/// count would exceed `options.node_budget`.
GridDomain rasterize(const DomainSpec& spec, const GridOptions& options);

/// Distance from every inside node to the domain boundary (0 outside),
/// computed exactly against the boundary crossing points of the grid rays.
/// Throws EmptyDomain if the grid has no inside node.
ScalarField distance_field(const GridDomain& grid);

/// 1 / max(dist). Throws EmptyDomain when the maximum is not positive.
double lambda_inf(const ScalarField& dist);

/// Connected components (8-neighbour) of the ridge set, each sorted by index.
std::vector<std::vector<std::size_t>> ridge_components(const GridDomain& grid);

/// The ridge component with the largest mean x coordinate.
std::vector<std::size_t> right_ridge(const GridDomain& grid);

}  // namespace infground
