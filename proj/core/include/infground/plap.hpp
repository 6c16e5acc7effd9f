#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "infground/grid.hpp"
#include "infground/trace.hpp"

namespace infground {

enum class SeedStrategy { Distance, Constant, Given };

/// Search direction of the projected descent.
enum class DescentMethod {
  Lbfgs,    ///< limited-memory quasi-Newton direction, Armijo backtracking
  Gradient  ///< steepest descent; step halves on failure, grows 1.1x on success
};

/// Principal Dirichlet eigenproblem of the p-Laplacian on a grid.
struct PLapProblem {
  std::shared_ptr<const GridDomain> grid;
  double p = 2.0;
  double tol = 1e-9;
  std::size_t max_iters = 200'000;
  SeedStrategy seed_strategy = SeedStrategy::Distance;
  std::optional<ScalarField> seed;  ///< required for SeedStrategy::Given
  std::size_t window = 20;
  DescentMethod method = DescentMethod::Lbfgs;
  std::size_t memory = 10;  ///< L-BFGS history length
  unsigned threads = 0;
  /// Called with (iteration, log quotient) after every accepted step.
  std::function<void(std::size_t, double)> observer;
};

struct EigenResult {
  double p = 2.0;
  double lambda = 0.0;  ///< R^{1/p}
  ScalarField field;    ///< nonnegative, sum u^p h^2 = 1
  std::size_t iterations = 0;
  double residual = 0.0;  ///< relative quotient change over the stopping window
  bool converged = false;
  std::map<std::string, double> diagnostics;
};

inline constexpr double kMaxP = 128.0;

/// Discrete quotient sum_cells E_cell h^2 / sum_nodes u^p h^2. E_cell is the
/// mean of |g|^p over the four corner gradients of the cell, each built from
/// the two cell edges meeting at that corner. Unlike the averaged
/// (cell-centred) gradient this has no checkerboard null mode.
/// Evaluated on the max-normalized field in log space.
/// Throws ZeroField for an identically-zero field, InvalidParameter for
/// p outside [2, 128].
double rayleigh_quotient(const ScalarField& field, const GridDomain& grid, double p);

/// log of rayleigh_quotient, finite for every p in range (-inf when the
/// numerator vanishes).
double log_rayleigh_quotient(const ScalarField& field, const GridDomain& grid, double p);

/// Partial derivatives of rayleigh_quotient with respect to inside-node
/// values; 0 at outside nodes.
ScalarField quotient_gradient(const ScalarField& field, const GridDomain& grid, double p);

/// Rescales so that sum u^p h^2 = 1. Throws ZeroField on a zero field.
ScalarField normalize_lp(const ScalarField& field, const GridDomain& grid, double p);

/// Projected descent on the log quotient with backtracking line search,
/// clipping negative values to 0 after every step. Stops when the relative
/// quotient change over `window` iterations drops below `tol`. Returns a
/// non-converged result (converged = false) when max_iters is reached.
EigenResult minimize_rayleigh(const PLapProblem& problem);

struct PContinuationOptions {
  double tol = 1e-9;
  std::size_t max_iters = 200'000;
  DescentMethod method = DescentMethod::Lbfgs;
  Probes probes;
  unsigned threads = 0;
  std::optional<ScalarField> seed;  ///< first step seed; distance field if empty
};

/// Solves along an increasing p schedule starting at 2, seeding each solve
/// with the previous minimizer. Every step is recorded; non-converged steps
/// are flagged, not fatal.
ContinuationTrace p_continuation(std::shared_ptr<const GridDomain> grid,
                                 const std::vector<double>& p_schedule,
                                 const PContinuationOptions& options = {});

/// The EigenResult of a p-continuation step, reassembled from the trace.
EigenResult step_result(const TraceStep& step);

struct DecayReport {
  bool applicable = false;
  std::string reason;  ///< why the check was not applicable
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  ///< max over checked nodes of u - bound
  std::vector<std::size_t> violating_nodes;
};

/// Checks u <= 6 min(delta - x2, delta + x2)^{(p-2)/(p-1)} + h on inside
/// tube nodes with x1 in [x_lo, x_hi] and |x2| < delta, after scaling the
/// field to global maximum 1. Not applicable when p < 7 or lambda >= 2.
DecayReport tube_decay_check(const EigenResult& result, const GridDomain& grid, double delta,
                             double x_lo, double x_hi);

struct TubeEnergy {
  double u_grad_pm1 = 0.0;  ///< sum over region cells of u |Du|^{p-1} h^2
  double grad_p = 0.0;      ///< sum over region cells of |Du|^p h^2
  double u_grad_pm1_root = 0.0;
  double grad_p_root = 0.0;
  std::size_t cells = 0;
};

/// Tube integrals over cells whose centre lies strictly inside `region`,
/// evaluated on the field scaled to global maximum 1. Cell value of u is the
/// corner average. Throws EmptyDomain when no cell centre lies in `region`.
TubeEnergy tube_energy(const ScalarField& field, const GridDomain& grid, double p,
                       const Rect& region);

}  // namespace infground
