#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infground/experiments.hpp"

namespace infground {

enum class Command { Domain, Plap, Inf, Sweep, Witness, Verify };

/// Validated run configuration.
///
/// JSON layout (every block optional, unknown keys rejected):
///   command                       domain | plap | inf | sweep | witness | verify
///   preset, delta, epsilon        shorthands for the domain block
///   domain   {preset, delta, epsilon, primitives}
///   grid     {h, padding, node_budget}
///   plap     {p, p_schedule, battery_ps, tol, max_iters, method, seed}
///   inf      {tol, max_iters, pin, pins, seed, stencil, accelerate}
///   experiment {epsilon_schedule, deltas, gap_threshold}
///   probes   {left, right}
///   threads, out                  execution settings, not part of the canonical form
struct RunConfig {
  std::optional<Command> command;
  std::string preset = "dumbbell";
  ExperimentConfig experiment;
  std::optional<double> p;  ///< single-p solve for the plap command
  SeedStrategy plap_seed = SeedStrategy::Distance;
  PinStrategy pin = PinStrategy::RightRidge;
  std::vector<Point> pin_points;  ///< explicit pins, snapped to the nearest inside node
  SeedStrategy inf_seed = SeedStrategy::Distance;
  std::string out;
};

std::string command_name(Command command);

/// Parses and validates a JSON document. Errors are InvalidParameter with a
/// message of the form "<key path>: <reason>".
RunConfig parse_config(std::string_view text);

/// Canonical JSON text: fixed key order, defaults filled in, execution
/// settings dropped. parse_config(canonicalize(c)) canonicalizes to the same
/// text.
std::string canonicalize(const RunConfig& config);

/// FNV-1a 64 digest of the canonical text.
std::uint64_t config_hash(const RunConfig& config);
std::string config_hash_hex(const RunConfig& config);

}  // namespace infground
