#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "infground/geometry.hpp"
#include "infground/grid.hpp"
#include "infground/inf.hpp"
#include "infground/plap.hpp"
#include "infground/trace.hpp"

namespace infground {

enum class DomainKind { Dumbbell, DumbbellAsym, Stadium, Ball, DisjointBalls, Custom };

struct ExperimentConfig {
  DomainKind domain = DomainKind::Dumbbell;
  std::optional<DomainSpec> custom;  ///< required for DomainKind::Custom
  double delta = 0.05;               ///< tube half-width
  double epsilon = 0.0;              ///< left-bulb shrink for the asymmetric presets
  std::vector<double> epsilon_schedule{0.2, 0.1, 0.05, 0.02, 0.0};
  std::vector<double> deltas{0.2, 0.1, 0.05};
  double h = 0.0;  ///< 0 selects delta/4 for dumbbells, 1/64 otherwise
  double padding = -1.0;
  std::size_t node_budget = 4'000'000;

  double inf_tol = 1e-8;
  std::size_t inf_max_iters = 200'000;
  Stencil stencil = Stencil::Eight;
  bool accelerate = true;

  double plap_tol = 1e-9;
  std::size_t plap_max_iters = 200'000;
  DescentMethod plap_method = DescentMethod::Lbfgs;
  std::vector<double> p_schedule{2, 4, 8, 16, 32, 64};
  std::vector<double> battery_ps{8, 16, 32};

  double gap_threshold = 0.3;
  Probes probes;
  unsigned threads = 0;
};

/// Throws InvalidParameter naming the offending field.
void validate(const ExperimentConfig& config);

/// Grid spacing after applying the default rule.
double resolved_h(const ExperimentConfig& config);

/// Domain of the configured kind. `epsilon` overrides the configured left
/// bulb shrink for the dumbbell and disjoint-ball kinds.
DomainSpec experiment_domain(const ExperimentConfig& config, std::optional<double> epsilon = std::nullopt);

std::shared_ptr<const GridDomain> experiment_grid(const ExperimentConfig& config, const DomainSpec& spec);

/// Bilinear interpolation of `field` (on `from`) at the inside nodes of `to`,
/// clipped to [0,1] and zero outside `to`. Nodes of `to` that coincide with
/// nodes of `from` copy the value exactly.
ScalarField resample(const ScalarField& field, const GridDomain& from, const GridDomain& to);

/// Right-pinned infinity solves along the epsilon schedule, each seeded by
/// the previous field resampled to the new grid. A non-converged step ends
/// the trace with complete = false.
ContinuationTrace epsilon_continuation(const ExperimentConfig& config);

struct VariationalState {
  EigenResult result;  ///< field scaled to maximum 1
  ContinuationTrace trace;
  std::shared_ptr<const GridDomain> grid;
  double asymmetry = 0.0;
  double probe_left = 0.0;
  double probe_right = 0.0;
};

/// p-continuation on the symmetric dumbbell to the largest scheduled p.
VariationalState symmetric_variational_state(const ExperimentConfig& config);

struct WitnessReport {
  std::string domain;
  double h = 0.0;
  double lambda = 0.0;
  double threshold = 0.0;  ///< residual threshold tol * h
  InfResult symmetric;
  InfResult asymmetric;
  ContinuationTrace trace;  ///< epsilon continuation; empty for the other kinds
  std::shared_ptr<const GridDomain> grid;

  double sym_probe_left = 0.0, sym_probe_right = 0.0;
  double asym_probe_left = 0.0, asym_probe_right = 0.0;
  double sym_residual = 0.0, asym_residual = 0.0;
  double gap = 0.0;      ///< |u_sym - u_asym| at the left probe
  double sup_gap = 0.0;  ///< max over inside nodes
  bool residuals_ok = false;
  bool witness = false;  ///< gap >= threshold and both residuals pass
  bool unique = false;   ///< gap <= 5h
  bool passed = false;
  std::optional<double> small_ball_max;       ///< disjoint balls: max on the smaller ball
  std::optional<double> direct_discrepancy;   ///< dumbbell: continuation vs direct epsilon = 0 solve
};

/// Symmetric state (both ridges pinned, distance seed) against an asymmetric
/// one (epsilon continuation for dumbbells, right ridge with a constant seed
/// otherwise) on the same grid and lambda.
WitnessReport nonuniqueness_witness(const ExperimentConfig& config);

struct DeltaRow {
  double delta = 0.0;
  double h = 0.0;
  double probe_left = 0.0;  ///< asymmetric state
  double probe_right = 0.0;
  double gap = 0.0;
  bool witness = false;
  bool converged = false;
};

struct DeltaSweep {
  std::vector<DeltaRow> rows;  ///< in decreasing delta order
  bool monotone = true;        ///< probe_left non-increasing as delta decreases
};

/// Witness per delta with h = delta/4.
DeltaSweep delta_sweep(const ExperimentConfig& config);

struct BatteryRow {
  double p = 0.0;
  double lambda = 0.0;
  bool converged = false;
  DecayReport decay;
  TubeEnergy energy;
};

struct BoundRow {
  std::string state;
  BoundReport bound;
};

struct BatteryReport {
  std::vector<BatteryRow> decay_rows;
  std::vector<BoundRow> bound_rows;
  bool passed = false;
};

/// Tube decay and energy on p-solutions for each battery p, and the distance
/// bound on every infinity state of the witness.
BatteryReport lemma_battery(const ExperimentConfig& config);

}  // namespace infground
