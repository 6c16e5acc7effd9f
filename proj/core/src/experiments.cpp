#include "infground/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "infground/error.hpp"

namespace infground {

namespace {

bool is_dumbbell(DomainKind kind) {
  return kind == DomainKind::Dumbbell || kind == DomainKind::DumbbellAsym;
}

[[noreturn]] void invalid(const std::string& key, const std::string& reason) {
  throw InvalidParameter(key + ": " + reason);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

InfProblem base_problem(const ExperimentConfig& config, std::shared_ptr<const GridDomain> grid) {
  InfProblem problem;
  problem.grid = std::move(grid);
  problem.tol = config.inf_tol;
  problem.max_iters = config.inf_max_iters;
  problem.stencil = config.stencil;
  problem.accelerate = config.accelerate;
  problem.threads = config.threads;
  return problem;
}

double sup_difference(const ScalarField& a, const ScalarField& b, const GridDomain& grid) {
  double d = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.inside(k)) d = std::max(d, std::abs(a[k] - b[k]));
  }
  return d;
}

TraceStep inf_step(double parameter, const InfResult& result, std::shared_ptr<const GridDomain> grid,
                   const Probes& probes, double wall_time) {
  TraceStep step;
  step.parameter = parameter;
  step.lambda = result.lambda;
  step.residual = result.residual;
  step.threshold = result.threshold;
  step.converged = result.converged;
  step.iterations = result.iterations;
  step.probe_left = probe_value(result.field, *grid, probes.left);
  step.probe_right = probe_value(result.field, *grid, probes.right);
  step.wall_time = wall_time;
  step.grid = std::move(grid);
  step.field = result.field;
  step.branch_map.reserve(result.branch_map.size());
  for (Branch b : result.branch_map) step.branch_map.push_back(static_cast<std::uint8_t>(b));
  return step;
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (!(config.delta > 0.0 && config.delta < 1.0)) invalid("domain.delta", "must lie in (0,1)");
  if (!(config.epsilon >= 0.0 && config.epsilon < 1.0)) invalid("domain.epsilon", "must lie in [0,1)");
  if (config.domain == DomainKind::Custom && !config.custom) invalid("domain.primitives", "custom domain needs primitives");
  if (config.h < 0.0 || !std::isfinite(config.h)) invalid("grid.h", "must be positive");
  const double h = resolved_h(config);
  if (is_dumbbell(config.domain) && h > config.delta / 4.0 * (1.0 + 1e-12)) {
    invalid("grid.h", "must not exceed delta/4");
  }
  if (config.epsilon_schedule.empty()) invalid("experiment.epsilon_schedule", "must not be empty");
  for (std::size_t i = 0; i < config.epsilon_schedule.size(); ++i) {
    const double e = config.epsilon_schedule[i];
    if (!(e >= 0.0 && e < 1.0)) invalid("experiment.epsilon_schedule", "entries must lie in [0,1)");
    if (i > 0 && !(e < config.epsilon_schedule[i - 1])) invalid("experiment.epsilon_schedule", "must be strictly decreasing");
  }
  if (config.epsilon_schedule.back() != 0.0) invalid("experiment.epsilon_schedule", "must end at 0");
  if (config.deltas.empty()) invalid("experiment.deltas", "must not be empty");
  for (double d : config.deltas) {
    if (!(d > 0.0 && d < 1.0)) invalid("experiment.deltas", "entries must lie in (0,1)");
  }
  if (!(config.inf_tol > 0.0)) invalid("inf.tol", "must be positive");
  if (config.inf_max_iters == 0) invalid("inf.max_iters", "must be positive");
  if (!(config.plap_tol > 0.0)) invalid("plap.tol", "must be positive");
  if (config.plap_max_iters == 0) invalid("plap.max_iters", "must be positive");
  if (config.p_schedule.empty() || config.p_schedule.front() != 2.0) {
    invalid("plap.p_schedule", "must start at 2");
  }
  for (std::size_t i = 0; i < config.p_schedule.size(); ++i) {
    const double p = config.p_schedule[i];
    if (!(p >= 2.0 && p <= kMaxP)) invalid("plap.p_schedule", "entries must lie in [2,128]");
    if (i > 0 && !(p > config.p_schedule[i - 1])) invalid("plap.p_schedule", "must be strictly increasing");
  }
  for (double p : config.battery_ps) {
    if (!(p >= 2.0 && p <= kMaxP)) invalid("plap.battery_ps", "entries must lie in [2,128]");
  }
  if (!(config.gap_threshold > 0.0)) invalid("experiment.gap_threshold", "must be positive");
}

double resolved_h(const ExperimentConfig& config) {
  if (config.h > 0.0) return config.h;
  return is_dumbbell(config.domain) ? config.delta / 4.0 : 1.0 / 64.0;
}

DomainSpec experiment_domain(const ExperimentConfig& config, std::optional<double> epsilon) {
  const double eps = epsilon.value_or(config.epsilon);
  switch (config.domain) {
    case DomainKind::Dumbbell:
      return make_dumbbell(config.delta, epsilon.value_or(0.0));
    case DomainKind::DumbbellAsym:
      return make_dumbbell(config.delta, eps);
    case DomainKind::Stadium:
      return make_stadium();
    case DomainKind::Ball:
      return make_ball_domain({0.0, 0.0}, 1.0);
    case DomainKind::DisjointBalls:
      return make_disjoint_balls(eps);
    case DomainKind::Custom:
      if (!config.custom) throw InvalidParameter("domain: custom domain needs primitives");
      return *config.custom;
  }
  throw InvalidParameter("domain: unknown kind");
}

std::shared_ptr<const GridDomain> experiment_grid(const ExperimentConfig& config, const DomainSpec& spec) {
  GridOptions options;
  options.h = resolved_h(config);
  options.padding = config.padding;
  options.node_budget = config.node_budget;
  return std::make_shared<const GridDomain>(rasterize(spec, options));
}

ScalarField resample(const ScalarField& field, const GridDomain& from, const GridDomain& to) {
  if (field.nx() != from.nx() || field.ny() != from.ny()) {
    throw InvalidParameter("field is not aligned with the source grid");
  }
  auto value = [&](long i, long j) {
    if (i < 0 || j < 0 || i >= static_cast<long>(from.nx()) || j >= static_cast<long>(from.ny())) return 0.0;
    const std::size_t k = from.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return from.inside(k) ? field[k] : 0.0;
  };
  auto snap = [](double f) {
    const double r = std::round(f);
    return std::abs(f - r) < 1e-9 ? r : f;
  };
  ScalarField out(to.nx(), to.ny(), 0.0);
  for (std::size_t k = 0; k < to.size(); ++k) {
    if (!to.inside(k)) continue;
    const Point p = to.node(k);
    const double fx = snap(from.fx(p.x));
    const double fy = snap(from.fy(p.y));
    const double ix = std::floor(fx), iy = std::floor(fy);
    const double tx = fx - ix, ty = fy - iy;
    const long i = static_cast<long>(ix), j = static_cast<long>(iy);
    double v;
    if (tx == 0.0 && ty == 0.0) {
      v = value(i, j);
    } else {
      v = (1.0 - tx) * (1.0 - ty) * value(i, j) + tx * (1.0 - ty) * value(i + 1, j) +
          (1.0 - tx) * ty * value(i, j + 1) + tx * ty * value(i + 1, j + 1);
    }
    out[k] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

ContinuationTrace epsilon_continuation(const ExperimentConfig& config) {
  validate(config);
  ContinuationTrace trace;
  trace.parameter_name = "epsilon";
  std::shared_ptr<const GridDomain> previous_grid;
  ScalarField previous;
  for (double eps : config.epsilon_schedule) {
    const auto start = std::chrono::steady_clock::now();
    auto grid = experiment_grid(config, experiment_domain(config, eps));
    InfProblem problem = base_problem(config, grid);
    problem.pins = make_pins(*grid, PinStrategy::RightRidge);
    const double lambda = problem_lambda(problem);
    if (previous_grid) {
      problem.seed = make_inf_seed(*grid, SeedStrategy::Given, lambda, problem.pins,
                                   resample(previous, *previous_grid, *grid));
    } else {
      problem.seed = make_inf_seed(*grid, SeedStrategy::Distance, lambda, problem.pins);
    }
    InfResult result = solve_inf(problem);
    trace.steps.push_back(inf_step(eps, result, grid, config.probes, seconds_since(start)));
    if (!result.converged) {
      trace.complete = false;
      break;
    }
    previous_grid = grid;
    previous = std::move(result.field);
  }
  return trace;
}

VariationalState symmetric_variational_state(const ExperimentConfig& config) {
  validate(config);
  VariationalState state;
  state.grid = experiment_grid(config, make_dumbbell(config.delta, 0.0));
  PContinuationOptions options;
  options.tol = config.plap_tol;
  options.max_iters = config.plap_max_iters;
  options.method = config.plap_method;
  options.probes = config.probes;
  options.threads = config.threads;
  state.trace = p_continuation(state.grid, config.p_schedule, options);
  state.result = step_result(state.trace.steps.back());
  state.result.field = max_normalized(state.result.field);
  state.asymmetry = mirror_asymmetry(state.result.field, *state.grid);
  state.probe_left = probe_value(state.result.field, *state.grid, config.probes.left);
  state.probe_right = probe_value(state.result.field, *state.grid, config.probes.right);
  return state;
}

WitnessReport nonuniqueness_witness(const ExperimentConfig& config) {
  validate(config);
  WitnessReport report;
  const double final_eps = config.domain == DomainKind::Dumbbell ? 0.0 : config.epsilon;
  const DomainSpec spec = experiment_domain(config, final_eps);
  report.domain = spec.name();
  report.grid = experiment_grid(config, spec);
  const GridDomain& grid = *report.grid;
  report.h = grid.h();

  InfProblem sym = base_problem(config, report.grid);
  sym.pins = make_pins(grid, PinStrategy::FullRidge);
  report.lambda = problem_lambda(sym);
  sym.seed = make_inf_seed(grid, SeedStrategy::Distance, report.lambda, sym.pins);
  report.symmetric = solve_inf(sym);
  report.threshold = report.symmetric.threshold;

  InfProblem asym = base_problem(config, report.grid);
  asym.pins = make_pins(grid, PinStrategy::RightRidge);
  if (config.domain == DomainKind::Dumbbell) {
    report.trace = epsilon_continuation(config);
    const TraceStep& last = report.trace.steps.back();
    report.asymmetric.field = resample(last.field, *last.grid, grid);
    report.asymmetric.lambda = last.lambda;
    report.asymmetric.residual = last.residual;
    report.asymmetric.threshold = last.threshold;
    report.asymmetric.iterations = last.iterations;
    report.asymmetric.converged = last.converged;
    report.asymmetric.branch_map = branch_map(report.asymmetric.field, asym);

    InfProblem direct = asym;
    direct.seed = make_inf_seed(grid, SeedStrategy::Distance, report.lambda, direct.pins);
    const InfResult direct_result = solve_inf(direct);
    report.direct_discrepancy = sup_difference(direct_result.field, report.asymmetric.field, grid);
  } else {
    asym.seed = make_inf_seed(grid, SeedStrategy::Constant, report.lambda, asym.pins);
    report.asymmetric = solve_inf(asym);
  }

  report.sym_residual = inf_residual(report.symmetric.field, sym);
  report.asym_residual = inf_residual(report.asymmetric.field, asym);
  report.sym_probe_left = probe_value(report.symmetric.field, grid, config.probes.left);
  report.sym_probe_right = probe_value(report.symmetric.field, grid, config.probes.right);
  report.asym_probe_left = probe_value(report.asymmetric.field, grid, config.probes.left);
  report.asym_probe_right = probe_value(report.asymmetric.field, grid, config.probes.right);
  report.gap = std::abs(report.sym_probe_left - report.asym_probe_left);
  report.sup_gap = sup_difference(report.symmetric.field, report.asymmetric.field, grid);
  report.residuals_ok = report.symmetric.converged && report.asymmetric.converged &&
                        report.sym_residual <= report.threshold && report.asym_residual <= report.threshold;
  report.witness = report.residuals_ok && report.gap >= config.gap_threshold;
  report.unique = report.gap <= 5.0 * report.h;

  switch (config.domain) {
    case DomainKind::Dumbbell:
    case DomainKind::DumbbellAsym:
      report.passed = report.witness;
      break;
    case DomainKind::DisjointBalls: {
      double m = 0.0;
      const Point centre{-5.0, 0.0};
      const double r = 1.0 - config.epsilon;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!grid.inside(k)) continue;
        const Point x = grid.node(k);
        if (std::hypot(x.x - centre.x, x.y - centre.y) < r) m = std::max(m, report.asymmetric.field[k]);
      }
      report.small_ball_max = m;
      report.passed = report.residuals_ok && m <= config.inf_tol;
      break;
    }
    case DomainKind::Ball:
    case DomainKind::Stadium:
    case DomainKind::Custom:
      report.passed = report.residuals_ok && report.unique;
      break;
  }
  return report;
}

DeltaSweep delta_sweep(const ExperimentConfig& config) {
  validate(config);
  std::vector<double> deltas = config.deltas;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  DeltaSweep sweep;
  for (double delta : deltas) {
    ExperimentConfig run = config;
    run.domain = DomainKind::Dumbbell;
    run.delta = delta;
    run.h = delta / 4.0;
    const WitnessReport w = nonuniqueness_witness(run);
    DeltaRow row;
    row.delta = delta;
    row.h = w.h;
    row.probe_left = w.asym_probe_left;
    row.probe_right = w.asym_probe_right;
    row.gap = w.gap;
    row.witness = w.witness;
    row.converged = w.residuals_ok;
    if (!sweep.rows.empty() && row.probe_left > sweep.rows.back().probe_left) sweep.monotone = false;
    sweep.rows.push_back(row);
  }
  return sweep;
}

BatteryReport lemma_battery(const ExperimentConfig& config) {
  validate(config);
  BatteryReport report;
  report.passed = true;

  if (!config.battery_ps.empty()) {
    std::vector<double> ps = config.battery_ps;
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    std::vector<double> schedule{2.0};
    if (ps.front() > 4.0) schedule.push_back(4.0);
    for (double p : ps) {
      if (p > schedule.back()) schedule.push_back(p);
    }
    auto grid = experiment_grid(config, make_dumbbell(config.delta, 0.0));
    PContinuationOptions options;
    options.tol = config.plap_tol;
    options.max_iters = config.plap_max_iters;
    options.method = config.plap_method;
    options.probes = config.probes;
    options.threads = config.threads;
    const ContinuationTrace trace = p_continuation(grid, schedule, options);
    const Rect tube{-3.0, 3.0, -config.delta, config.delta};
    for (const TraceStep& step : trace.steps) {
      if (!std::binary_search(ps.begin(), ps.end(), step.parameter)) continue;
      BatteryRow row;
      row.p = step.parameter;
      row.lambda = step.lambda;
      row.converged = step.converged;
      const EigenResult result = step_result(step);
      row.decay = tube_decay_check(result, *grid, config.delta, tube.xmin, tube.xmax);
      row.energy = tube_energy(result.field, *grid, row.p, tube);
      if (!row.converged || !row.decay.applicable || row.decay.violations > 0) report.passed = false;
      report.decay_rows.push_back(std::move(row));
    }
    if (!trace.complete || report.decay_rows.size() != ps.size()) report.passed = false;
  }

  ExperimentConfig witness_config = config;
  witness_config.domain = DomainKind::Dumbbell;
  const WitnessReport w = nonuniqueness_witness(witness_config);
  report.bound_rows.push_back({"symmetric", distance_bound_check(w.symmetric, *w.grid)});
  report.bound_rows.push_back({"asymmetric", distance_bound_check(w.asymmetric, *w.grid)});
  for (const TraceStep& step : w.trace.steps) {
    std::ostringstream name;
    name << "epsilon=" << step.parameter;
    report.bound_rows.push_back({name.str(), distance_bound_check(step.field, *step.grid)});
  }
  for (const BoundRow& row : report.bound_rows) {
    if (row.bound.violations > 0) report.passed = false;
  }
  return report;
}

}  // namespace infground
