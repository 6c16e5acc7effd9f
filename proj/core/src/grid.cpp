#include "infground/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "infground/error.hpp"

namespace infground {

double ScalarField::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::max(m, v);
  return m;
}

ScalarField ScalarField::scaled(double c) const {
  ScalarField out = *this;
  for (double& v : out.values_) v *= c;
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double step_length(int d, double h) { return d < 4 ? h : std::sqrt(2.0) * h; }

/// Uniform bucket grid over a point set answering exact nearest-distance
/// queries. The result is the exact minimum over the set, so it does not
/// depend on the order points were inserted.
class PointLocator {
 public:
  PointLocator(const std::vector<Point>& points, double cell) : points_(points), cell_(cell) {
    minx_ = miny_ = std::numeric_limits<double>::infinity();
    double maxx = -minx_, maxy = -miny_;
    for (const Point& p : points_) {
      minx_ = std::min(minx_, p.x);
      miny_ = std::min(miny_, p.y);
      maxx = std::max(maxx, p.x);
      maxy = std::max(maxy, p.y);
    }
    ncx_ = static_cast<long>(std::floor((maxx - minx_) / cell_)) + 1;
    ncy_ = static_cast<long>(std::floor((maxy - miny_) / cell_)) + 1;
    start_.assign(static_cast<std::size_t>(ncx_ * ncy_) + 1, 0);
    std::vector<std::size_t> cell_of(points_.size());
    for (std::size_t n = 0; n < points_.size(); ++n) {
      cell_of[n] = cell_index(points_[n]);
      ++start_[cell_of[n] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    order_.resize(points_.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t n = 0; n < points_.size(); ++n) order_[fill[cell_of[n]]++] = n;
  }

  double nearest_distance(Point q) const {
    const long ci = static_cast<long>(std::floor((q.x - minx_) / cell_));
    const long cj = static_cast<long>(std::floor((q.y - miny_) / cell_));
    const long reach = std::max({std::abs(ci), std::abs(ci - ncx_), std::abs(cj),
                                 std::abs(cj - ncy_)}) + 1;
    double best = std::numeric_limits<double>::infinity();
    for (long r = 0; r <= reach; ++r) {
      if (r > 0 && best <= static_cast<double>(r - 1) * cell_) break;
      for (long dj = -r; dj <= r; ++dj) {
        const long j = cj + dj;
        if (j < 0 || j >= ncy_) continue;
        const bool edge_row = (dj == -r || dj == r);
        for (long di = -r; di <= r; di += edge_row ? 1 : 2 * std::max(r, 1L)) {
          const long i = ci + di;
          if (i >= 0 && i < ncx_) scan_cell(static_cast<std::size_t>(j * ncx_ + i), q, best);
          if (r == 0) break;
        }
      }
    }
    return best;
  }

 private:
  std::size_t cell_index(Point p) const {
    const long i = std::clamp(static_cast<long>(std::floor((p.x - minx_) / cell_)), 0L, ncx_ - 1);
    const long j = std::clamp(static_cast<long>(std::floor((p.y - miny_) / cell_)), 0L, ncy_ - 1);
    return static_cast<std::size_t>(j * ncx_ + i);
  }

  void scan_cell(std::size_t c, Point q, double& best) const {
    for (std::size_t s = start_[c]; s < start_[c + 1]; ++s) {
      const Point& p = points_[order_[s]];
      const double dx = q.x - p.x;
      const double dy = q.y - p.y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < best) best = d;
    }
  }

  const std::vector<Point>& points_;
  double cell_;
  double minx_, miny_;
  long ncx_ = 0, ncy_ = 0;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

}  // namespace

double GridDomain::fx(double px) const { return (px - shift_.x) / h_ - static_cast<double>(i0_); }
double GridDomain::fy(double py) const { return (py - shift_.y) / h_ - static_cast<double>(j0_); }

long GridDomain::neighbor(std::size_t k, int d) const {
  const long i = static_cast<long>(col(k)) + kDirections[static_cast<std::size_t>(d)][0];
  const long j = static_cast<long>(row(k)) + kDirections[static_cast<std::size_t>(d)][1];
  if (i < 0 || j < 0 || i >= static_cast<long>(nx_) || j >= static_cast<long>(ny_)) return -1;
  return j * static_cast<long>(nx_) + i;
}

long GridDomain::nearest_inside_node(Point p) const {
  long best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) {
    if (!inside_[k]) continue;
    const Point q = node(k);
    const double d2 = (q.x - p.x) * (q.x - p.x) + (q.y - p.y) * (q.y - p.y);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<long>(k);
    }
  }
  return best;
}

long GridDomain::mirror_x(std::size_t k) const {
  long mi;
  if (shift_.x == 0.0) {
    mi = -2 * i0_ - static_cast<long>(col(k));
  } else {
    mi = std::lround(fx(-x(col(k))));
  }
  if (mi < 0 || mi >= static_cast<long>(nx_)) return -1;
  return static_cast<long>(row(k)) * static_cast<long>(nx_) + mi;
}

void GridDomain::finish() {
  inside_count_ = static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), 1));
  if (inside_count_ == 0) {
    dist_ = ScalarField(nx_, ny_, 0.0);
    ridge_.clear();
    return;
  }
  dist_ = distance_field(*this);
  const double dmax = dist_.max();
  ridge_.clear();
  for (std::size_t k = 0; k < size(); ++k) {
    if (inside_[k] && dist_[k] >= dmax - ridge_tol_) ridge_.push_back(k);
  }
}

GridDomain GridDomain::from_mask(std::size_t nx, std::size_t ny, double h, Point origin,
                                 std::vector<std::uint8_t> inside, double ridge_tol) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidParameter("grid spacing h must be positive");
  if (nx == 0 || ny == 0 || inside.size() != nx * ny) {
    throw InvalidParameter("inside mask size does not match nx*ny");
  }
  GridDomain g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.h_ = h;
  g.shift_ = origin;
  g.ridge_tol_ = ridge_tol < 0.0 ? 0.5 * h : ridge_tol;
  g.inside_ = std::move(inside);
  for (auto& v : g.inside_) v = v ? 1 : 0;
  g.rays_.assign(nx * ny, std::array<double, 8>{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN});
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside_[k]) continue;
    const Point a = g.node(k);
    for (int d = 0; d < 8; ++d) {
      const auto& dir = kDirections[static_cast<std::size_t>(d)];
      const Point b{a.x + dir[0] * h, a.y + dir[1] * h};
      const long n = g.neighbor(k, d);
      if (n < 0) {
        g.samples_.push_back(b);
        continue;
      }
      g.rays_[k][static_cast<std::size_t>(d)] = step_length(d, h);
      if (!g.inside_[static_cast<std::size_t>(n)]) g.samples_.push_back(b);
    }
  }
  g.finish();
  return g;
}

GridDomain rasterize(const DomainSpec& spec, const GridOptions& options) {
  const double h = options.h;
  if (!(h > 0.0) || !std::isfinite(h)) {
    std::ostringstream msg;
    msg << "grid spacing h must be positive, got " << h;
    throw InvalidParameter(msg.str());
  }
  const double padding = options.padding < 0.0 ? 2.0 * h : options.padding;
  if (!(padding >= h * (1.0 - 1e-12))) {
    std::ostringstream msg;
    msg << "padding must be at least h (" << h << "), got " << padding;
    throw InvalidParameter(msg.str());
  }
  const BoundingBox box = spec.bounds();
  const long i0 = static_cast<long>(std::floor((box.xmin - padding) / h));
  const long i1 = static_cast<long>(std::ceil((box.xmax + padding) / h));
  const long j0 = static_cast<long>(std::floor((box.ymin - padding) / h));
  const long j1 = static_cast<long>(std::ceil((box.ymax + padding) / h));
  const double nodes = static_cast<double>(i1 - i0 + 1) * static_cast<double>(j1 - j0 + 1);
  if (nodes > static_cast<double>(options.node_budget)) {
    std::ostringstream msg;
    msg << "grid of " << static_cast<long long>(nodes) << " nodes exceeds node budget "
        << options.node_budget;
    throw ResourceError(msg.str());
  }

  GridDomain g;
  g.nx_ = static_cast<std::size_t>(i1 - i0 + 1);
  g.ny_ = static_cast<std::size_t>(j1 - j0 + 1);
  g.h_ = h;
  g.i0_ = i0;
  g.j0_ = j0;
  g.ridge_tol_ = options.ridge_tol < 0.0 ? 0.5 * h : options.ridge_tol;
  g.spec_ = spec;
  g.inside_.assign(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k) g.inside_[k] = spec.contains(g.node(k)) ? 1 : 0;

  g.rays_.assign(g.size(), std::array<double, 8>{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN});
  const double bisect_tol = h / 100.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside_[k]) continue;
    const Point a = g.node(k);
    for (int d = 0; d < 8; ++d) {
      const long n = g.neighbor(k, d);
      if (n < 0) continue;
      const double len = step_length(d, h);
      if (g.inside_[static_cast<std::size_t>(n)]) {
        g.rays_[k][static_cast<std::size_t>(d)] = len;
        continue;
      }
      const auto& dir = kDirections[static_cast<std::size_t>(d)];
      const double sx = dir[0] * h;
      const double sy = dir[1] * h;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 30 && (hi - lo) * len > bisect_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (spec.contains({a.x + mid * sx, a.y + mid * sy})) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double t = 0.5 * (lo + hi);
      g.rays_[k][static_cast<std::size_t>(d)] = t * len;
      g.samples_.push_back({a.x + t * sx, a.y + t * sy});
    }
  }
  g.finish();
  return g;
}

ScalarField distance_field(const GridDomain& grid) {
  if (grid.inside_count() == 0) throw EmptyDomain("distance field requested on a grid with no inside nodes");
  const auto& samples = grid.boundary_samples();
  if (samples.empty()) throw EmptyDomain("domain has no boundary crossings on the grid");
  PointLocator locator(samples, 8.0 * grid.h());
  ScalarField dist(grid.nx(), grid.ny(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.inside(k)) dist[k] = locator.nearest_distance(grid.node(k));
  }
  return dist;
}

double lambda_inf(const ScalarField& dist) {
  const double dmax = dist.empty() ? 0.0 : dist.max();
  if (!(dmax > 0.0)) throw EmptyDomain("distance field has no positive maximum");
  return 1.0 / dmax;
}

std::vector<std::vector<std::size_t>> ridge_components(const GridDomain& grid) {
  std::vector<std::uint8_t> on_ridge(grid.size(), 0), seen(grid.size(), 0);
  for (std::size_t k : grid.ridge()) on_ridge[k] = 1;
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t start : grid.ridge()) {
    if (seen[start]) continue;
    std::vector<std::size_t> comp;
    std::queue<std::size_t> queue;
    queue.push(start);
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop();
      comp.push_back(k);
      for (int d = 0; d < 8; ++d) {
        const long n = grid.neighbor(k, d);
        if (n >= 0 && on_ridge[static_cast<std::size_t>(n)] && !seen[static_cast<std::size_t>(n)]) {
          seen[static_cast<std::size_t>(n)] = 1;
          queue.push(static_cast<std::size_t>(n));
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

std::vector<std::size_t> right_ridge(const GridDomain& grid) {
  auto comps = ridge_components(grid);
  if (comps.empty()) return {};
  std::size_t best = 0;
  double best_x = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double sx = 0.0;
    for (std::size_t k : comps[c]) sx += grid.node(k).x;
    sx /= static_cast<double>(comps[c].size());
    if (sx > best_x) {
      best_x = sx;
      best = c;
    }
  }
  return comps[best];
}

}  // namespace infground
