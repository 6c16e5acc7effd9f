#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "infground/grid.hpp"

namespace infground {

/// Nominal points at which fields are sampled.
struct Probes {
  Point left{-5.0, 0.0};
  Point right{5.0, 0.0};
};

/// Value at the inside node nearest `p` (ties: lowest node index); 0 when
/// the grid has no inside node.
double probe_value(const ScalarField& field, const GridDomain& grid, Point p);

/// Field divided by its maximum. Throws ZeroField when the maximum is not
/// positive.
ScalarField max_normalized(const ScalarField& field);

/// max |u(x1,x2) - u(-x1,x2)| over nodes whose mirror image is on the grid.
double mirror_asymmetry(const ScalarField& field, const GridDomain& grid);

struct TraceStep {
  double parameter = 0.0;  ///< epsilon or p
  double lambda = 0.0;
  double residual = 0.0;
  double threshold = 0.0;  ///< residual threshold used for the convergence flag
  bool converged = false;
  std::size_t iterations = 0;
  double probe_left = 0.0;   ///< on the max-normalized field
  double probe_right = 0.0;  ///< on the max-normalized field
  double wall_time = 0.0;    ///< seconds
  std::shared_ptr<const GridDomain> grid;
  ScalarField field;
  std::vector<std::uint8_t> branch_map;  ///< empty for p-Laplacian steps
};

/// Ordered record of solves along a parameter schedule.
struct ContinuationTrace {
  std::string parameter_name;  ///< "epsilon" or "p"
  std::vector<TraceStep> steps;
  bool complete = true;  ///< false when a non-converged step aborted the run
};

}  // namespace infground
