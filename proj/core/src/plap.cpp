#include "infground/plap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "infground/error.hpp"
#include "infground/parallel.hpp"

namespace infground {

namespace {

constexpr std::size_t kBlock = 4096;

void check_p(double p) {
  if (!(p >= 2.0 && p <= kMaxP)) {
    std::ostringstream msg;
    msg << "p must lie in [2, " << kMaxP << "], got " << p;
    throw InvalidParameter(msg.str());
  }
}

void check_aligned(const ScalarField& field, const GridDomain& grid) {
  if (field.nx() != grid.nx() || field.ny() != grid.ny()) {
    throw InvalidParameter("field is not aligned with the grid");
  }
}

/// One-sided differences of a cell with corners v00, v10, v01, v11. The four
/// corner gradients are (bottom, left), (bottom, right), (top, left) and
/// (top, right); the cell energy is the mean of their p-th powers.
struct CellDiffs {
  double bottom, top, left, right;
};

inline CellDiffs cell_diffs(double v00, double v10, double v01, double v11, double inv_h) {
  return {(v10 - v00) * inv_h, (v11 - v01) * inv_h, (v01 - v00) * inv_h, (v11 - v10) * inv_h};
}

inline double corner_norm(double gx, double gy) { return std::sqrt(gx * gx + gy * gy); }

/// Discrete quotient and its first variation on one grid.
///
/// All evaluation happens on v = u / max|u|; gradient magnitudes are further
/// divided by their maximum before the p-th power, so nothing overflows for
/// p <= 128.
class Quotient {
 public:
  Quotient(const GridDomain& grid, double p, unsigned threads)
      : grid_(grid), p_(p), threads_(threads), bottom_(grid.size(), 0.0), top_(grid.size(), 0.0),
        left_(grid.size(), 0.0), right_(grid.size(), 0.0) {
    const std::size_t nx = grid.nx(), ny = grid.ny();
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        const std::size_t k = grid.index(i, j);
        if (grid.inside(k) || grid.inside(k + 1) || grid.inside(k + nx) || grid.inside(k + nx + 1)) {
          cells_.push_back(k);
        }
      }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid.inside(k)) nodes_.push_back(k);
    }
    if (nodes_.empty()) throw EmptyDomain("quotient requested on a grid with no inside nodes");
  }

  const std::vector<std::size_t>& nodes() const { return nodes_; }

  double scale_of(const ScalarField& u) const {
    double c = 0.0;
    for (std::size_t k : nodes_) c = std::max(c, std::abs(u[k]));
    if (!(c > 0.0) || !std::isfinite(c)) throw ZeroField("quotient of an identically-zero field");
    return c;
  }

  /// log R(u). When `grad` is non-null it receives d(log R)/du at inside nodes.
  double evaluate(const ScalarField& u, ScalarField* grad) {
    const double c = scale_of(u);
    const double inv_c = 1.0 / c;
    const std::size_t nx = grid_.nx();
    const double inv_h = 1.0 / grid_.h();

    auto v = [&](std::size_t k) { return grid_.inside(k) ? u[k] * inv_c : 0.0; };

    const double gmax = block_max(cells_.size(), kBlock, threads_, [&](std::size_t b, std::size_t e) {
      double m = 0.0;
      for (std::size_t n = b; n < e; ++n) {
        const std::size_t k = cells_[n];
        const CellDiffs d = cell_diffs(v(k), v(k + 1), v(k + nx), v(k + nx + 1), inv_h);
        bottom_[k] = d.bottom;
        top_[k] = d.top;
        left_[k] = d.left;
        right_[k] = d.right;
        m = std::max({m, corner_norm(d.bottom, d.left), corner_norm(d.bottom, d.right),
                      corner_norm(d.top, d.left), corner_norm(d.top, d.right)});
      }
      return m;
    });

    const double pm2 = p_ - 2.0;
    double s1 = 0.0;
    if (gmax > 0.0) {
      const double inv_gmax = 1.0 / gmax;
      auto weight = [&](double gx, double gy, double& acc) {
        const double r = corner_norm(gx, gy) * inv_gmax;
        const double w = r > 0.0 ? std::pow(r, pm2) : (pm2 == 0.0 ? 1.0 : 0.0);
        acc += w * r * r;
        return w;
      };
      s1 = block_sum(cells_.size(), kBlock, threads_, [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t n = b; n < e; ++n) {
          const std::size_t k = cells_[n];
          const double gb = bottom_[k], gt = top_[k], gl = left_[k], gr = right_[k];
          double cell = 0.0;
          const double w_bl = weight(gb, gl, cell);
          const double w_br = weight(gb, gr, cell);
          const double w_tl = weight(gt, gl, cell);
          const double w_tr = weight(gt, gr, cell);
          s += 0.25 * cell;
          // Weighted differences: d(energy)/d(difference), up to a common factor.
          bottom_[k] = w_bl * gb + w_br * gb;
          top_[k] = w_tl * gt + w_tr * gt;
          left_[k] = w_bl * gl + w_tl * gl;
          right_[k] = w_br * gr + w_tr * gr;
        }
        return s;
      });
    }

    const double s2 = block_sum(nodes_.size(), kBlock, threads_, [&](std::size_t b, std::size_t e) {
      double s = 0.0;
      for (std::size_t n = b; n < e; ++n) s += std::pow(std::abs(u[nodes_[n]] * inv_c), p_);
      return s;
    });

    const double log_num =
        gmax > 0.0 ? p_ * std::log(gmax) + std::log(s1) : -std::numeric_limits<double>::infinity();
    const double log_r = log_num - std::log(s2);

    if (grad != nullptr) {
      *grad = ScalarField(grid_.nx(), grid_.ny(), 0.0);
      const double num_factor = gmax > 0.0 ? 0.25 * p_ / (gmax * gmax * s1) * inv_h : 0.0;
      const double den_factor = p_ / s2;
      const std::size_t ny = grid_.ny();
      for_each_block(nodes_.size(), kBlock, threads_, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t n = b; n < e; ++n) {
          const std::size_t k = nodes_[n];
          const std::size_t i = grid_.col(k), j = grid_.row(k);
          // Cell contributions as seen from each corner; grouped so that a
          // node and its mirror image sum identical terms in identical order.
          double c00 = 0.0, c10 = 0.0, c01 = 0.0, c11 = 0.0;
          if (i + 1 < nx && j + 1 < ny) c00 = -bottom_[k] - left_[k];
          if (i > 0 && j + 1 < ny) c10 = bottom_[k - 1] - right_[k - 1];
          if (i + 1 < nx && j > 0) c01 = -top_[k - nx] + left_[k - nx];
          if (i > 0 && j > 0) c11 = top_[k - nx - 1] + right_[k - nx - 1];
          const double dnum = ((c00 + c10) + (c01 + c11)) * num_factor;
          const double vk = u[k] * inv_c;
          const double dden = den_factor * std::pow(std::abs(vk), p_ - 1.0) * (vk < 0.0 ? -1.0 : 1.0);
          (*grad)[k] = (dnum - dden) * inv_c;
        }
      });
    }
    return log_r;
  }

 private:
  const GridDomain& grid_;
  double p_;
  unsigned threads_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> nodes_;
  std::vector<double> bottom_, top_, left_, right_;
};

ScalarField make_seed(const PLapProblem& problem) {
  const GridDomain& grid = *problem.grid;
  ScalarField seed(grid.nx(), grid.ny(), 0.0);
  switch (problem.seed_strategy) {
    case SeedStrategy::Distance:
      seed = grid.dist();
      break;
    case SeedStrategy::Constant:
      for (std::size_t k = 0; k < grid.size(); ++k) seed[k] = grid.inside(k) ? 1.0 : 0.0;
      break;
    case SeedStrategy::Given:
      if (!problem.seed) throw InvalidParameter("seed strategy 'given' needs a seed field");
      check_aligned(*problem.seed, grid);
      seed = *problem.seed;
      break;
  }
  bool positive = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.inside(k)) {
      seed[k] = 0.0;
      continue;
    }
    if (!std::isfinite(seed[k]) || seed[k] < 0.0) throw InvalidParameter("seed must be finite and nonnegative");
    if (seed[k] > 0.0) positive = true;
  }
  if (!positive) throw InvalidParameter("seed is identically zero on the inside nodes");
  return seed;
}

}  // namespace

double log_rayleigh_quotient(const ScalarField& field, const GridDomain& grid, double p) {
  check_p(p);
  check_aligned(field, grid);
  Quotient q(grid, p, 1);
  return q.evaluate(field, nullptr);
}

double rayleigh_quotient(const ScalarField& field, const GridDomain& grid, double p) {
  return std::exp(log_rayleigh_quotient(field, grid, p));
}

ScalarField quotient_gradient(const ScalarField& field, const GridDomain& grid, double p) {
  check_p(p);
  check_aligned(field, grid);
  Quotient q(grid, p, 1);
  ScalarField grad;
  const double log_r = q.evaluate(field, &grad);
  const double r = std::exp(log_r);
  for (double& g : grad.values()) g *= r;
  return grad;
}

ScalarField normalize_lp(const ScalarField& field, const GridDomain& grid, double p) {
  check_p(p);
  check_aligned(field, grid);
  double c = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) c = std::max(c, std::abs(field[k]));
  if (!(c > 0.0)) throw ZeroField("cannot normalize an identically-zero field");
  const double h2 = grid.h() * grid.h();
  double s = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) s += std::pow(std::abs(field[k]) / c, p) * h2;
  // u / (c * s^{1/p}) has sum |u|^p h^2 = 1.
  const double scale = std::exp(-std::log(c) - std::log(s) / p);
  return field.scaled(scale);
}

EigenResult minimize_rayleigh(const PLapProblem& problem) {
  if (!problem.grid) throw InvalidParameter("problem has no grid");
  const GridDomain& grid = *problem.grid;
  check_p(problem.p);
  if (!(problem.tol > 0.0)) throw InvalidParameter("tol must be positive");
  if (problem.window == 0) throw InvalidParameter("stopping window must be positive");
  if (grid.inside_count() == 0) throw EmptyDomain("p-Laplacian solve on a grid with no inside nodes");

  const unsigned threads = resolve_threads(problem.threads);
  Quotient quotient(grid, problem.p, threads);
  const auto& nodes = quotient.nodes();

  ScalarField v = make_seed(problem);
  v = v.scaled(1.0 / quotient.scale_of(v));

  const std::size_t n = nodes.size();
  ScalarField grad, trial_grad, trial(grid.nx(), grid.ny(), 0.0);
  double log_r = quotient.evaluate(v, &grad);
  std::vector<double> history{log_r};
  constexpr int kMaxHalvings = 60;
  constexpr std::size_t kStallWindow = 5;
  bool converged = false;
  bool stalled = false;
  double residual = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;

  // L-BFGS state over the inside nodes.
  std::vector<std::vector<double>> mem_s, mem_y;
  std::vector<double> mem_rho;
  std::vector<double> dir(n), alpha(problem.memory);
  double gd_step = 1.0;

  auto reset_memory = [&] {
    mem_s.clear();
    mem_y.clear();
    mem_rho.clear();
  };

  while (iter < problem.max_iters) {
    ++iter;
    // Search direction.
    bool quasi_newton = problem.method == DescentMethod::Lbfgs && !mem_s.empty();
    if (quasi_newton) {
      for (std::size_t m = 0; m < n; ++m) dir[m] = -grad[nodes[m]];
      const std::size_t len = mem_s.size();
      for (std::size_t l = len; l-- > 0;) {
        double a = 0.0;
        for (std::size_t m = 0; m < n; ++m) a += mem_s[l][m] * dir[m];
        a *= mem_rho[l];
        alpha[l] = a;
        for (std::size_t m = 0; m < n; ++m) dir[m] -= a * mem_y[l][m];
      }
      double sy = 0.0, yy = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        sy += mem_s[len - 1][m] * mem_y[len - 1][m];
        yy += mem_y[len - 1][m] * mem_y[len - 1][m];
      }
      const double gamma = sy / yy;
      for (std::size_t m = 0; m < n; ++m) dir[m] *= gamma;
      for (std::size_t l = 0; l < len; ++l) {
        double b = 0.0;
        for (std::size_t m = 0; m < n; ++m) b += mem_y[l][m] * dir[m];
        b *= mem_rho[l];
        for (std::size_t m = 0; m < n; ++m) dir[m] += mem_s[l][m] * (alpha[l] - b);
      }
    } else {
      double gmax = 0.0;
      for (std::size_t m = 0; m < n; ++m) gmax = std::max(gmax, std::abs(grad[nodes[m]]));
      // First L-BFGS step moves the largest node by at most 1% of the maximum.
      const double scale =
          problem.method == DescentMethod::Gradient ? 1.0 : (gmax > 0.0 ? 0.01 / gmax : 1.0);
      for (std::size_t m = 0; m < n; ++m) dir[m] = -grad[nodes[m]] * scale;
    }
    // Active bound: nodes sitting at 0 do not move further down.
    double slope = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (v[nodes[m]] <= 0.0 && dir[m] < 0.0) dir[m] = 0.0;
      slope += grad[nodes[m]] * dir[m];
    }
    if (quasi_newton && !(slope < 0.0)) {
      reset_memory();
      --iter;
      continue;
    }

    double step = problem.method == DescentMethod::Gradient ? gd_step : 1.0;
    const double floor_factor = problem.method == DescentMethod::Gradient ? 0.0 : 0.5;
    bool accepted = false;
    double trial_log_r = log_r;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      double tmax = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t k = nodes[m];
        // Gradient descent clips at 0; L-BFGS stops halfway to the bound so
        // inside values stay positive.
        trial[k] = std::max(floor_factor * v[k], v[k] + step * dir[m]);
        tmax = std::max(tmax, trial[k]);
      }
      if (tmax > 0.0) {
        trial_log_r = quotient.evaluate(trial, nullptr);
        const double target = problem.method == DescentMethod::Gradient
                                  ? log_r
                                  : log_r + 1e-4 * step * slope;
        if (trial_log_r < log_r && trial_log_r <= target) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (problem.method == DescentMethod::Lbfgs && !mem_s.empty()) {
        // Retry along the gradient before declaring a stall.
        reset_memory();
        continue;
      }
      stalled = true;
      break;
    }

    trial_log_r = quotient.evaluate(trial, &trial_grad);
    if (problem.method == DescentMethod::Lbfgs) {
      std::vector<double> s_vec(n), y_vec(n);
      double sy = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t k = nodes[m];
        s_vec[m] = trial[k] - v[k];
        y_vec[m] = trial_grad[k] - grad[k];
        sy += s_vec[m] * y_vec[m];
      }
      if (sy > 1e-300) {
        if (mem_s.size() == problem.memory) {
          mem_s.erase(mem_s.begin());
          mem_y.erase(mem_y.begin());
          mem_rho.erase(mem_rho.begin());
        }
        mem_s.push_back(std::move(s_vec));
        mem_y.push_back(std::move(y_vec));
        mem_rho.push_back(1.0 / sy);
      }
    } else {
      gd_step = step * 1.1;
    }
    std::swap(v, trial);
    std::swap(grad, trial_grad);
    log_r = trial_log_r;

    // The quotient is scale invariant; keep max(v) near 1 so the gradient
    // scale stays put. Rescaling invalidates the curvature history.
    const double vmax = quotient.scale_of(v);
    if (vmax < 0.5 || vmax > 2.0) {
      v = v.scaled(1.0 / vmax);
      log_r = quotient.evaluate(v, &grad);
      reset_memory();
    }

    history.push_back(log_r);
    if (problem.observer) problem.observer(iter, log_r);
    if (history.size() > problem.window) {
      const double past = history[history.size() - 1 - problem.window];
      residual = std::abs(std::expm1(past - log_r));
      if (residual < problem.tol) {
        converged = true;
        break;
      }
    }
  }
  if (stalled) {
    // No representable step decreases the quotient. Judge the plateau on the
    // last few steps: L-BFGS can reach round-off well inside one window.
    if (history.size() > 1) {
      const std::size_t back = std::min<std::size_t>(kStallWindow, history.size() - 1);
      residual = std::abs(std::expm1(history[history.size() - 1 - back] - log_r));
    } else {
      residual = 0.0;
    }
    converged = residual <= problem.tol;
  }

  EigenResult result;
  result.p = problem.p;
  result.lambda = std::exp(log_r / problem.p);
  result.field = normalize_lp(v, grid, problem.p);
  result.iterations = iter;
  result.residual = residual;
  result.converged = converged;
  result.diagnostics["log_quotient"] = log_r;
  result.diagnostics["stalled"] = stalled ? 1.0 : 0.0;
  result.diagnostics["max_value"] = result.field.max();
  double gnorm = 0.0;
  {
    // Gradient of R at the normalized field.
    ScalarField g;
    const double lr = quotient.evaluate(result.field, &g);
    const double r = std::exp(lr);
    for (std::size_t k : nodes) gnorm = std::max(gnorm, std::abs(g[k] * r));
  }
  result.diagnostics["gradient_norm"] = gnorm;
  return result;
}

ContinuationTrace p_continuation(std::shared_ptr<const GridDomain> grid,
                                 const std::vector<double>& p_schedule,
                                 const PContinuationOptions& options) {
  if (!grid) throw InvalidParameter("p continuation needs a grid");
  if (p_schedule.empty() || p_schedule.front() != 2.0) {
    throw InvalidParameter("p schedule must start at 2");
  }
  for (std::size_t n = 1; n < p_schedule.size(); ++n) {
    if (!(p_schedule[n] > p_schedule[n - 1])) throw InvalidParameter("p schedule must be strictly increasing");
  }
  for (double p : p_schedule) check_p(p);

  ContinuationTrace trace;
  trace.parameter_name = "p";
  std::optional<ScalarField> seed = options.seed;
  for (double p : p_schedule) {
    const auto t0 = std::chrono::steady_clock::now();
    PLapProblem problem;
    problem.grid = grid;
    problem.p = p;
    problem.tol = options.tol;
    problem.max_iters = options.max_iters;
    problem.method = options.method;
    problem.threads = options.threads;
    if (seed) {
      problem.seed_strategy = SeedStrategy::Given;
      problem.seed = max_normalized(*seed);
    }
    EigenResult result = minimize_rayleigh(problem);
    const auto t1 = std::chrono::steady_clock::now();

    TraceStep step;
    step.parameter = p;
    step.lambda = result.lambda;
    step.residual = result.residual;
    step.threshold = options.tol;
    step.converged = result.converged;
    step.iterations = result.iterations;
    const ScalarField normalized = max_normalized(result.field);
    step.probe_left = probe_value(normalized, *grid, options.probes.left);
    step.probe_right = probe_value(normalized, *grid, options.probes.right);
    step.wall_time = std::chrono::duration<double>(t1 - t0).count();
    step.grid = grid;
    step.field = result.field;
    seed = result.field;
    trace.steps.push_back(std::move(step));
    if (!result.converged) trace.complete = false;
  }
  return trace;
}

EigenResult step_result(const TraceStep& step) {
  EigenResult result;
  result.p = step.parameter;
  result.lambda = step.lambda;
  result.field = step.field;
  result.iterations = step.iterations;
  result.residual = step.residual;
  result.converged = step.converged;
  return result;
}

DecayReport tube_decay_check(const EigenResult& result, const GridDomain& grid, double delta,
                             double x_lo, double x_hi) {
  DecayReport report;
  if (result.p < 7.0) {
    report.reason = "decay bound requires p >= 7";
    return report;
  }
  if (!(result.lambda < 2.0)) {
    report.reason = "decay bound requires lambda < 2";
    return report;
  }
  if (!(delta > 0.0)) {
    report.reason = "tube half-width must be positive";
    return report;
  }
  check_aligned(result.field, grid);
  report.applicable = true;
  const ScalarField u = max_normalized(result.field);
  const double alpha = (result.p - 2.0) / (result.p - 1.0);
  report.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.inside(k)) continue;
    const Point x = grid.node(k);
    if (x.x < x_lo || x.x > x_hi || !(std::abs(x.y) < delta)) continue;
    const double wall = std::min(delta - x.y, delta + x.y);
    const double bound = 6.0 * std::pow(wall, alpha) + grid.h();
    const double margin = u[k] - bound;
    ++report.checked;
    report.worst_margin = std::max(report.worst_margin, margin);
    if (margin > 0.0) {
      ++report.violations;
      report.violating_nodes.push_back(k);
    }
  }
  if (report.checked == 0) report.worst_margin = 0.0;
  return report;
}

TubeEnergy tube_energy(const ScalarField& field, const GridDomain& grid, double p, const Rect& region) {
  check_p(p);
  check_aligned(field, grid);
  double c = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) c = std::max(c, std::abs(field[k]));
  const double inv_c = c > 0.0 ? 1.0 / c : 0.0;
  const double h = grid.h();
  const double h2 = h * h;
  const std::size_t nx = grid.nx();
  TubeEnergy out;
  for (std::size_t j = 0; j + 1 < grid.ny(); ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double cx = 0.5 * (grid.x(i) + grid.x(i + 1));
      const double cy = 0.5 * (grid.y(j) + grid.y(j + 1));
      if (!(cx > region.xmin && cx < region.xmax && cy > region.ymin && cy < region.ymax)) continue;
      ++out.cells;
      const std::size_t k = grid.index(i, j);
      auto v = [&](std::size_t n) { return grid.inside(n) ? field[n] * inv_c : 0.0; };
      const double v00 = v(k), v10 = v(k + 1), v01 = v(k + nx), v11 = v(k + nx + 1);
      const CellDiffs d = cell_diffs(v00, v10, v01, v11, 1.0 / h);
      const double ubar = 0.25 * (v00 + v10 + v01 + v11);
      for (const double g : {corner_norm(d.bottom, d.left), corner_norm(d.bottom, d.right),
                             corner_norm(d.top, d.left), corner_norm(d.top, d.right)}) {
        out.u_grad_pm1 += 0.25 * ubar * std::pow(g, p - 1.0) * h2;
        out.grad_p += 0.25 * std::pow(g, p) * h2;
      }
    }
  }
  if (out.cells == 0) throw EmptyDomain("tube energy region contains no cells");
  out.u_grad_pm1_root = std::pow(out.u_grad_pm1, 1.0 / p);
  out.grad_p_root = std::pow(out.grad_p, 1.0 / p);
  return out;
}

}  // namespace infground
