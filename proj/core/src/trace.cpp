#include "infground/trace.hpp"

#include <algorithm>
#include <cmath>

#include "infground/error.hpp"

namespace infground {

double probe_value(const ScalarField& field, const GridDomain& grid, Point p) {
  const long k = grid.nearest_inside_node(p);
  return k < 0 ? 0.0 : field[static_cast<std::size_t>(k)];
}

ScalarField max_normalized(const ScalarField& field) {
  const double m = field.empty() ? 0.0 : field.max();
  if (!(m > 0.0)) throw ZeroField("cannot max-normalize a field without a positive value");
  return field.scaled(1.0 / m);
}

double mirror_asymmetry(const ScalarField& field, const GridDomain& grid) {
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const long m = grid.mirror_x(k);
    if (m < 0) continue;
    worst = std::max(worst, std::abs(field[k] - field[static_cast<std::size_t>(m)]));
  }
  return worst;
}

}  // namespace infground
