#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "infground/grid.hpp"
#include "infground/plap.hpp"

namespace infground {

enum class Stencil { Four = 4, Eight = 8 };

enum class SweepMode {
  Jacobi,      ///< parallel, order independent
  GaussSeidel  ///< serial in-place; result depends on node order
};

/// Per-node tag of the branch attaining the update.
enum class Branch : std::uint8_t { Outside = 0, Pinned = 1, Harmonic = 2, Gradient = 3 };

struct InfProgress {
  std::size_t iteration = 0;
  double change = 0.0;
};

/// Fixed-point problem for max{lambda - |Du|/u, Delta_inf u} = 0 with u = 0
/// outside the domain and u = 1 on the pin set.
struct InfProblem {
  std::shared_ptr<const GridDomain> grid;
  std::optional<double> lambda;  ///< defaults to lambda_inf of the grid distance field
  std::vector<std::size_t> pins;
  ScalarField seed;  ///< in [0,1]; empty means the scaled distance field
  double tol = 1e-8;  ///< stopping threshold is tol * h on the max node change
  std::size_t max_iters = 200'000;
  Stencil stencil = Stencil::Eight;
  SweepMode mode = SweepMode::Jacobi;
  /// Interleave policy steps (exact solves of the linear system selected by
  /// the current branch choices) with the sweeps. A policy step is kept
  /// only if it lowers the sweep change.
  bool accelerate = true;
  std::size_t accelerate_every = 100;
  unsigned threads = 0;
  std::size_t progress_every = 1000;
  std::function<void(const InfProgress&)> progress;
};

struct InfResult {
  ScalarField field;  ///< in [0,1], 1 on pins, 0 outside
  double lambda = 0.0;
  double residual = 0.0;   ///< max node change of the final sweep
  double threshold = 0.0;  ///< tol * h
  std::size_t iterations = 0;
  std::size_t policy_steps = 0;  ///< accepted policy steps
  bool converged = false;
  std::vector<Branch> branch_map;
};

/// Effective lambda of a problem (explicit value or lambda_inf of the grid).
double problem_lambda(const InfProblem& problem);

/// One Jacobi sweep. For each unpinned inside node, with ray values v_d at
/// ray lengths l_d (outside neighbours contribute 0 at the sub-cell boundary
/// distance):
///   harmonic  u_h = max_i min_j (l_j v_i + l_i v_j) / (l_i + l_j)
///   gradient  u_g = max_i v_i / (1 + lambda l_i)
/// and the new value is min(u_h, u_g). Pins are set to 1, outside to 0.
/// An empty pin set is allowed here.
ScalarField inf_update(const ScalarField& field, const InfProblem& problem);

/// Iterates inf_update until the max node change is <= tol * h or max_iters
/// sweeps. Non-convergence is reported through `converged`.
InfResult solve_inf(const InfProblem& problem);

/// max over unpinned inside nodes of |field - inf_update(field)|.
double inf_residual(const ScalarField& field, const InfProblem& problem);

/// Branch attaining the update at each node for the given field.
std::vector<Branch> branch_map(const ScalarField& field, const InfProblem& problem);

struct BoundReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  ///< max of u - (dist + 2h)
  std::vector<std::size_t> violating_nodes;
};

/// Checks u <= dist + 2h on the max-normalized field.
BoundReport distance_bound_check(const ScalarField& field, const GridDomain& grid);
BoundReport distance_bound_check(const InfResult& result, const GridDomain& grid);

struct BranchRegion {
  std::size_t count = 0;
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;  ///< bounding box of the nodes
};

struct BranchSummary {
  std::array<BranchRegion, 4> regions;  ///< indexed by Branch
  const BranchRegion& operator[](Branch b) const { return regions[static_cast<std::size_t>(b)]; }
};

BranchSummary branch_partition(const InfResult& result, const GridDomain& grid);

enum class PinStrategy { RightRidge, FullRidge, Explicit };

/// Pin set for a strategy; `explicit_nodes` is used for PinStrategy::Explicit
/// and must contain inside nodes only.
std::vector<std::size_t> make_pins(const GridDomain& grid, PinStrategy strategy,
                                   const std::vector<std::size_t>& explicit_nodes = {});

/// Seed in [0,1]: the distance field times lambda (Distance), 1 on inside
/// nodes (Constant) or `given` clipped to [0,1] (Given); pins set to 1.
ScalarField make_inf_seed(const GridDomain& grid, SeedStrategy strategy, double lambda,
                          const std::vector<std::size_t>& pins,
                          const std::optional<ScalarField>& given = std::nullopt);

}  // namespace infground
