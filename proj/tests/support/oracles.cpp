#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

namespace oracle {

namespace {

double value(const ScalarField& u, const GridDomain& g, std::size_t i, std::size_t j) {
  const std::size_t k = g.index(i, j);
  return g.inside(k) ? u[k] : 0.0;
}

struct Corners {
  double g[4];
};

Corners corner_norms(double v00, double v10, double v01, double v11, double h) {
  const double bottom = (v10 - v00) / h, top = (v11 - v01) / h;
  const double left = (v01 - v00) / h, right = (v11 - v10) / h;
  return {{std::hypot(bottom, left), std::hypot(bottom, right), std::hypot(top, left), std::hypot(top, right)}};
}

}  // namespace

double brute_quotient(const ScalarField& u, const GridDomain& grid, double p) {
  const double h = grid.h();
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j + 1 < grid.ny(); ++j) {
    for (std::size_t i = 0; i + 1 < grid.nx(); ++i) {
      const Corners c = corner_norms(value(u, grid, i, j), value(u, grid, i + 1, j), value(u, grid, i, j + 1),
                                     value(u, grid, i + 1, j + 1), h);
      double e = 0.0;
      for (double g : c.g) e += std::pow(g, p);
      num += 0.25 * e * h * h;
    }
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.inside(k)) den += std::pow(std::abs(u[k]), p) * h * h;
  }
  return num / den;
}

std::pair<double, double> brute_tube_integrals(const ScalarField& u, const GridDomain& grid, double p,
                                               double xmin, double xmax, double ymin, double ymax) {
  double m = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) m = std::max(m, std::abs(u[k]));
  const double s = m > 0.0 ? 1.0 / m : 0.0;
  const double h = grid.h();
  double a = 0.0, b = 0.0;
  for (std::size_t j = 0; j + 1 < grid.ny(); ++j) {
    for (std::size_t i = 0; i + 1 < grid.nx(); ++i) {
      const double cx = (grid.x(i) + grid.x(i + 1)) / 2.0;
      const double cy = (grid.y(j) + grid.y(j + 1)) / 2.0;
      if (cx <= xmin || cx >= xmax || cy <= ymin || cy >= ymax) continue;
      const double v00 = s * value(u, grid, i, j), v10 = s * value(u, grid, i + 1, j);
      const double v01 = s * value(u, grid, i, j + 1), v11 = s * value(u, grid, i + 1, j + 1);
      const double ubar = (v00 + v10 + v01 + v11) / 4.0;
      const Corners c = corner_norms(v00, v10, v01, v11, h);
      for (double g : c.g) {
        a += 0.25 * ubar * std::pow(g, p - 1.0) * h * h;
        b += 0.25 * std::pow(g, p) * h * h;
      }
    }
  }
  return {a, b};
}

double five_point_min_eigenvalue(const GridDomain& grid) {
  std::vector<long> id(grid.size(), -1);
  long n = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.inside(k)) id[k] = n++;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t k = grid.index(i, j);
      if (id[k] < 0) continue;
      a(id[k], id[k]) = 4.0 * inv_h2;
      const long di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        const long ii = static_cast<long>(i) + di[d], jj = static_cast<long>(j) + dj[d];
        if (ii < 0 || jj < 0 || ii >= static_cast<long>(grid.nx()) || jj >= static_cast<long>(grid.ny())) continue;
        const long m = id[grid.index(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj))];
        if (m >= 0) a(id[k], m) = -inv_h2;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::vector<Point> lattice_points_in_ball(Point centre, double r, double h) {
  std::vector<Point> out;
  const long lo_i = static_cast<long>(std::floor((centre.x - r) / h)) - 1;
  const long hi_i = static_cast<long>(std::ceil((centre.x + r) / h)) + 1;
  const long lo_j = static_cast<long>(std::floor((centre.y - r) / h)) - 1;
  const long hi_j = static_cast<long>(std::ceil((centre.y + r) / h)) + 1;
  for (long j = lo_j; j <= hi_j; ++j) {
    for (long i = lo_i; i <= hi_i; ++i) {
      const Point p{i * h, j * h};
      if (std::hypot(p.x - centre.x, p.y - centre.y) < r) out.push_back(p);
    }
  }
  return out;
}

double ball_distance(Point x, Point centre, double r) {
  return std::max(0.0, r - std::hypot(x.x - centre.x, x.y - centre.y));
}

double rect_distance(Point x, double xmin, double xmax, double ymin, double ymax) {
  return std::max(0.0, std::min({x.x - xmin, xmax - x.x, x.y - ymin, ymax - x.y}));
}

ScalarField random_field(const GridDomain& grid, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField f(grid.nx(), grid.ny(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.inside(k)) f[k] = dist(rng);
  }
  return f;
}

std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out += (comma == std::string::npos ? line : line.substr(0, comma)) + '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace oracle
