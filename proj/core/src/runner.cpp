#include "infground/runner.hpp"

#include <cstdio>

#include <json.hpp>

#include "infground/error.hpp"
#include "infground/io.hpp"

#ifndef INFGROUND_VERSION
#define INFGROUND_VERSION "0.0.0"
#endif

namespace infground {

namespace {

using nlohmann::ordered_json;

std::string parameter_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Collects artifacts and the report for one run directory.
class RunDir {
 public:
  explicit RunDir(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    write_text(dir_ / name, content);
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

ordered_json probes_json(double left, double right) { return {{"left", left}, {"right", right}}; }

ordered_json bound_json(const BoundReport& b) {
  return {{"checked", b.checked}, {"violations", b.violations}, {"worst_margin", b.worst_margin},
          {"violating_nodes", b.violating_nodes}};
}

int finish_code(bool converged, bool verified) {
  if (!converged) return kExitNotConverged;
  return verified ? kExitOk : kExitVerificationFailed;
}

const char* status_of(int code) {
  switch (code) {
    case kExitOk:
      return "ok";
    case kExitNotConverged:
      return "not_converged";
    case kExitConfigError:
      return "config_error";
    default:
      return "verification_failed";
  }
}

int run_domain(const RunConfig& config, RunDir& dir, ordered_json& report) {
  const ExperimentConfig& ex = config.experiment;
  const DomainSpec spec = experiment_domain(ex);
  const auto grid = experiment_grid(ex, spec);
  const double lam = lambda_inf(grid->dist());
  dir.write("distance.csv", distance_csv(*grid));
  report["domain"] = spec.name();
  report["h"] = grid->h();
  report["nx"] = grid->nx();
  report["ny"] = grid->ny();
  report["inside_nodes"] = grid->inside_count();
  report["max_distance"] = 1.0 / lam;
  report["lambda"] = lam;
  report["ridge_nodes"] = grid->ridge().size();
  report["ridge_components"] = ridge_components(*grid).size();
  return kExitOk;
}

int run_plap(const RunConfig& config, RunDir& dir, ordered_json& report) {
  const ExperimentConfig& ex = config.experiment;
  const DomainSpec spec = experiment_domain(ex);
  const auto grid = experiment_grid(ex, spec);
  report["domain"] = spec.name();
  report["h"] = grid->h();
  if (config.p) {
    PLapProblem problem;
    problem.grid = grid;
    problem.p = *config.p;
    problem.tol = ex.plap_tol;
    problem.max_iters = ex.plap_max_iters;
    problem.method = ex.plap_method;
    problem.seed_strategy = config.plap_seed;
    problem.threads = ex.threads;
    const EigenResult result = minimize_rayleigh(problem);
    const std::string summary = eigen_summary_json(result, *grid, ex.probes);
    dir.write("field.csv", field_csv(result.field, *grid));
    dir.write("eigen.json", summary);
    report["eigen"] = ordered_json::parse(summary);
    report["converged"] = result.converged;
    report["asymmetry"] = mirror_asymmetry(max_normalized(result.field), *grid);
    return finish_code(result.converged, true);
  }
  PContinuationOptions options;
  options.tol = ex.plap_tol;
  options.max_iters = ex.plap_max_iters;
  options.method = ex.plap_method;
  options.probes = ex.probes;
  options.threads = ex.threads;
  if (config.plap_seed == SeedStrategy::Constant) {
    ScalarField seed(grid->nx(), grid->ny(), 0.0);
    for (std::size_t k = 0; k < grid->size(); ++k) seed[k] = grid->inside(k) ? 1.0 : 0.0;
    options.seed = seed;
  }
  const ContinuationTrace trace = p_continuation(grid, ex.p_schedule, options);
  dir.write("trace.csv", trace_csv(trace));
  ordered_json steps = ordered_json::array();
  bool converged = trace.complete;
  for (const TraceStep& step : trace.steps) {
    const EigenResult result = step_result(step);
    const std::string tag = parameter_tag(step.parameter);
    dir.write("field_p" + tag + ".csv", field_csv(result.field, *grid));
    steps.push_back(ordered_json::parse(eigen_summary_json(result, *grid, ex.probes)));
    converged = converged && step.converged;
  }
  report["steps"] = steps;
  report["converged"] = converged;
  report["lambda"] = trace.steps.back().lambda;
  report["asymmetry"] = mirror_asymmetry(max_normalized(trace.steps.back().field), *grid);
  return finish_code(converged, true);
}

int run_inf(const RunConfig& config, RunDir& dir, ordered_json& report) {
  const ExperimentConfig& ex = config.experiment;
  const DomainSpec spec = experiment_domain(ex);
  const auto grid = experiment_grid(ex, spec);
  InfProblem problem;
  problem.grid = grid;
  problem.tol = ex.inf_tol;
  problem.max_iters = ex.inf_max_iters;
  problem.stencil = ex.stencil;
  problem.accelerate = ex.accelerate;
  problem.threads = ex.threads;
  std::vector<std::size_t> nodes;
  for (const Point& p : config.pin_points) {
    const long k = grid->nearest_inside_node(p);
    if (k < 0) throw EmptyDomain("inf.pins: grid has no inside nodes");
    nodes.push_back(static_cast<std::size_t>(k));
  }
  problem.pins = make_pins(*grid, config.pin, nodes);
  problem.seed = make_inf_seed(*grid, config.inf_seed, problem_lambda(problem), problem.pins);
  const InfResult result = solve_inf(problem);
  dir.write("field.csv", field_csv(result.field, *grid));
  dir.write("branch.csv", branch_csv(result.branch_map, *grid));
  const BranchSummary branches = branch_partition(result, *grid);
  report["domain"] = spec.name();
  report["h"] = grid->h();
  report["lambda"] = result.lambda;
  report["residual"] = result.residual;
  report["threshold"] = result.threshold;
  report["iterations"] = result.iterations;
  report["policy_steps"] = result.policy_steps;
  report["converged"] = result.converged;
  report["pins"] = problem.pins.size();
  report["probes"] = probes_json(probe_value(result.field, *grid, ex.probes.left),
                                 probe_value(result.field, *grid, ex.probes.right));
  report["branch_counts"] = {{"pinned", branches[Branch::Pinned].count},
                             {"harmonic", branches[Branch::Harmonic].count},
                             {"gradient", branches[Branch::Gradient].count}};
  report["distance_bound"] = bound_json(distance_bound_check(result, *grid));
  return finish_code(result.converged, true);
}

ordered_json witness_json(const WitnessReport& w) {
  ordered_json j;
  j["domain"] = w.domain;
  j["h"] = w.h;
  j["lambda"] = w.lambda;
  j["threshold"] = w.threshold;
  j["gap"] = w.gap;
  j["sup_gap"] = w.sup_gap;
  j["symmetric"] = {{"probes", probes_json(w.sym_probe_left, w.sym_probe_right)},
                    {"residual", w.sym_residual},
                    {"iterations", w.symmetric.iterations},
                    {"converged", w.symmetric.converged}};
  j["asymmetric"] = {{"probes", probes_json(w.asym_probe_left, w.asym_probe_right)},
                     {"residual", w.asym_residual},
                     {"iterations", w.asymmetric.iterations},
                     {"converged", w.asymmetric.converged}};
  j["residuals_ok"] = w.residuals_ok;
  j["witness"] = w.witness;
  j["unique"] = w.unique;
  j["passed"] = w.passed;
  if (w.small_ball_max) j["small_ball_max"] = *w.small_ball_max;
  if (w.direct_discrepancy) j["direct_discrepancy"] = *w.direct_discrepancy;
  return j;
}

int run_witness(const RunConfig& config, RunDir& dir, ordered_json& report) {
  const WitnessReport w = nonuniqueness_witness(config.experiment);
  dir.write("field_symmetric.csv", field_csv(w.symmetric.field, *w.grid));
  dir.write("field_asymmetric.csv", field_csv(w.asymmetric.field, *w.grid));
  dir.write("branch_symmetric.csv", branch_csv(w.symmetric.branch_map, *w.grid));
  dir.write("branch_asymmetric.csv", branch_csv(w.asymmetric.branch_map, *w.grid));
  if (!w.trace.steps.empty()) {
    dir.write("trace.csv", trace_csv(w.trace));
    for (const TraceStep& step : w.trace.steps) {
      dir.write("field_epsilon" + parameter_tag(step.parameter) + ".csv", field_csv(step.field, *step.grid));
    }
  }
  const ordered_json details = witness_json(w);
  for (const auto& [key, value] : details.items()) report[key] = value;
  const bool converged = w.symmetric.converged && w.asymmetric.converged && (w.trace.steps.empty() || w.trace.complete);
  return finish_code(converged, w.passed);
}

int run_sweep(const RunConfig& config, RunDir& dir, ordered_json& report) {
  const DeltaSweep sweep = delta_sweep(config.experiment);
  std::string csv = "delta,h,probe_left,probe_right,gap,witness\n";
  ordered_json rows = ordered_json::array();
  bool converged = true;
  for (const DeltaRow& r : sweep.rows) {
    csv += format_number(r.delta) + ',' + format_number(r.h) + ',' + format_number(r.probe_left) + ',' +
           format_number(r.probe_right) + ',' + format_number(r.gap) + ',' + (r.witness ? "1" : "0") + '\n';
    rows.push_back({{"delta", r.delta}, {"h", r.h}, {"probe_left", r.probe_left}, {"probe_right", r.probe_right},
                    {"gap", r.gap}, {"witness", r.witness}, {"converged", r.converged}});
    converged = converged && r.converged;
  }
  dir.write("sweep.csv", csv);
  report["rows"] = rows;
  report["monotone"] = sweep.monotone;
  report["passed"] = sweep.monotone;
  return finish_code(converged, sweep.monotone);
}

int run_verify(const RunConfig& config, RunDir& dir, ordered_json& report) {
  const BatteryReport battery = lemma_battery(config.experiment);
  std::string csv = "p,lambda,checked,violations,worst_margin,u_grad_pm1_root,grad_p_root\n";
  ordered_json decay = ordered_json::array();
  bool converged = true;
  for (const BatteryRow& r : battery.decay_rows) {
    csv += format_number(r.p) + ',' + format_number(r.lambda) + ',' + std::to_string(r.decay.checked) + ',' +
           std::to_string(r.decay.violations) + ',' + format_number(r.decay.worst_margin) + ',' +
           format_number(r.energy.u_grad_pm1_root) + ',' + format_number(r.energy.grad_p_root) + '\n';
    decay.push_back({{"p", r.p},
                     {"lambda", r.lambda},
                     {"converged", r.converged},
                     {"applicable", r.decay.applicable},
                     {"checked", r.decay.checked},
                     {"violations", r.decay.violations},
                     {"worst_margin", r.decay.worst_margin},
                     {"violating_nodes", r.decay.violating_nodes},
                     {"energy", {{"u_grad_pm1", r.energy.u_grad_pm1},
                                 {"grad_p", r.energy.grad_p},
                                 {"u_grad_pm1_root", r.energy.u_grad_pm1_root},
                                 {"grad_p_root", r.energy.grad_p_root},
                                 {"cells", r.energy.cells}}}});
    converged = converged && r.converged;
  }
  dir.write("battery.csv", csv);
  ordered_json bounds = ordered_json::array();
  for (const BoundRow& r : battery.bound_rows) {
    ordered_json b = bound_json(r.bound);
    b["state"] = r.state;
    bounds.push_back(b);
  }
  report["decay"] = decay;
  report["distance_bounds"] = bounds;
  report["passed"] = battery.passed;
  return finish_code(converged, battery.passed);
}

RunSummary finish(int code, ordered_json report, RunDir& dir, const std::string& error) {
  RunSummary summary;
  summary.exit_code = code;
  summary.status = status_of(code);
  report["status"] = summary.status;
  report["exit_code"] = code;
  if (!error.empty()) report["error"] = error;
  std::vector<std::string> files = dir.files();
  files.push_back("report.json");
  report["files"] = files;
  summary.report = report.dump(2) + '\n';
  try {
    dir.write("report.json", summary.report);
  } catch (const IoError&) {
    // Directory not writable; the summary still carries the report.
  }
  summary.files = dir.files();
  return summary;
}

}  // namespace

std::string version() { return INFGROUND_VERSION; }

RunSummary run(const RunConfig& config, const std::filesystem::path& out_dir) {
  RunDir dir(out_dir);
  ordered_json report;
  report["command"] = config.command ? command_name(*config.command) : "";
  report["version"] = version();
  report["config_hash"] = config_hash_hex(config);
  if (!config.command) return finish(kExitConfigError, report, dir, "command: required");

  int code = kExitOk;
  std::string error;
  try {
    dir.write("config.json", canonicalize(config));
    switch (*config.command) {
      case Command::Domain:
        code = run_domain(config, dir, report);
        break;
      case Command::Plap:
        code = run_plap(config, dir, report);
        break;
      case Command::Inf:
        code = run_inf(config, dir, report);
        break;
      case Command::Sweep:
        code = run_sweep(config, dir, report);
        break;
      case Command::Witness:
        code = run_witness(config, dir, report);
        break;
      case Command::Verify:
        code = run_verify(config, dir, report);
        break;
    }
  } catch (const Error& e) {
    code = kExitConfigError;
    error = e.what();
  }
  return finish(code, report, dir, error);
}

RunSummary config_error_summary(const std::string& message, const std::filesystem::path& out_dir) {
  RunDir dir(out_dir);
  ordered_json report;
  report["command"] = "";
  report["version"] = version();
  return finish(kExitConfigError, report, dir, message);
}

}  // namespace infground
