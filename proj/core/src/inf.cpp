#include "infground/inf.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "infground/error.hpp"
#include "infground/parallel.hpp"

namespace infground {

namespace {

constexpr std::size_t kBlock = 2048;
constexpr long kBoundary = -1;

struct Ray {
  long node;     ///< neighbour index, or kBoundary for a zero boundary value
  double len;    ///< ray length
  double gfac;   ///< 1 / (1 + lambda len)
};

/// Choice made by the update at one node: new value = wa u[a] + wb u[b].
struct Policy {
  Branch branch = Branch::Harmonic;
  long a = kBoundary;
  long b = kBoundary;
  double wa = 0.0;
  double wb = 0.0;
};

/// Compiled form of an InfProblem: stencil rays of every free node.
class InfOperator {
 public:
  explicit InfOperator(const InfProblem& problem)
      : grid_(*problem.grid), lambda_(problem_lambda(problem)),
        role_(grid_.size(), Branch::Outside) {
    // role_: Outside, Pinned, or Harmonic for a free (updated) node.
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (grid_.inside(k)) role_[k] = Branch::Harmonic;
    }
    for (std::size_t k : problem.pins) {
      if (k >= grid_.size() || !grid_.inside(k)) throw InvalidParameter("pin node is not an inside node");
      role_[k] = Branch::Pinned;
    }
    const int ndir = static_cast<int>(problem.stencil);
    start_.push_back(0);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (role_[k] != Branch::Harmonic) continue;
      free_.push_back(k);
      for (int d = 0; d < ndir; ++d) {
        const double len = grid_.ray(k, d);
        if (std::isnan(len)) continue;
        const long n = grid_.neighbor(k, d);
        const long node = grid_.inside(static_cast<std::size_t>(n)) ? n : kBoundary;
        rays_.push_back({node, len, 1.0 / (1.0 + lambda_ * len)});
      }
      start_.push_back(rays_.size());
    }
  }

  double lambda() const { return lambda_; }
  const std::vector<std::size_t>& free_nodes() const { return free_; }

  /// Node-wise mirror image under x -> -x if roles and the field are exactly
  /// mirror-symmetric, else empty.
  std::vector<std::size_t> mirror_map(const ScalarField& u) const {
    std::vector<std::size_t> map(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      const long m = grid_.mirror_x(k);
      if (m < 0) {
        if (role_[k] != Branch::Outside) return {};
        map[k] = k;
        continue;
      }
      const auto mk = static_cast<std::size_t>(m);
      if (role_[mk] != role_[k] || u[mk] != u[k]) return {};
      map[k] = mk;
    }
    return map;
  }
  Branch role(std::size_t k) const { return role_[k]; }

  /// Both branch values at free node number `n`; fills `policy` with the
  /// choice made by min(u_h, u_g), ties going to the gradient branch.
  void evaluate(std::size_t n, std::span<const double> u, double& uh, double& ug,
                Policy* policy) const {
    const Ray* r = rays_.data() + start_[n];
    const std::size_t cnt = start_[n + 1] - start_[n];
    if (cnt == 0) {
      uh = ug = 0.0;
      if (policy != nullptr) *policy = Policy{Branch::Gradient, kBoundary, kBoundary, 0.0, 0.0};
      return;
    }
    double vals[8];
    ug = -1.0;
    std::size_t gi = 0;
    for (std::size_t i = 0; i < cnt; ++i) {
      vals[i] = r[i].node == kBoundary ? 0.0 : u[static_cast<std::size_t>(r[i].node)];
      const double g = vals[i] * r[i].gfac;
      if (g > ug) {
        ug = g;
        gi = i;
      }
    }
    uh = -std::numeric_limits<double>::infinity();
    std::size_t hi = 0, hj = 0;
    for (std::size_t i = 0; i < cnt; ++i) {
      const double vi = vals[i];
      if (vi <= uh) continue;  // min_j u_ij <= u_ii = v_i
      double mn = vi;
      std::size_t arg = i;
      for (std::size_t j = 0; j < cnt; ++j) {
        if (j == i) continue;
        const double uij = (r[j].len * vi + r[i].len * vals[j]) / (r[i].len + r[j].len);
        if (uij < mn) {
          mn = uij;
          arg = j;
          if (mn <= uh) break;
        }
      }
      if (mn > uh) {
        uh = mn;
        hi = i;
        hj = arg;
      }
    }
    if (policy == nullptr) return;
    if (ug <= uh) {
      *policy = Policy{Branch::Gradient, r[gi].node, kBoundary, r[gi].gfac, 0.0};
    } else if (hi == hj) {
      *policy = Policy{Branch::Harmonic, r[hi].node, kBoundary, 1.0, 0.0};
    } else {
      const double s = r[hi].len + r[hj].len;
      *policy = Policy{Branch::Harmonic, r[hi].node, r[hj].node, r[hj].len / s, r[hi].len / s};
    }
  }

  double update(std::size_t n, std::span<const double> u, Policy* policy = nullptr) const {
    double uh, ug;
    evaluate(n, u, uh, ug, policy);
    return std::min(uh, ug);
  }

  /// Branch label for reporting: the harmonic branch wins ties.
  Branch branch_at(std::size_t n, std::span<const double> u) const {
    double uh, ug;
    evaluate(n, u, uh, ug, nullptr);
    return uh <= ug ? Branch::Harmonic : Branch::Gradient;
  }

  /// Writes T(in) into out (pins 1, outside 0); returns max change on free nodes.
  double sweep(const ScalarField& in, ScalarField& out, unsigned threads) const {
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (role_[k] == Branch::Outside) out[k] = 0.0;
      if (role_[k] == Branch::Pinned) out[k] = 1.0;
    }
    const std::span<const double> u = in.values();
    return block_max(free_.size(), kBlock, threads, [&](std::size_t b, std::size_t e) {
      double change = 0.0;
      for (std::size_t n = b; n < e; ++n) {
        const std::size_t k = free_[n];
        const double v = update(n, u);
        out[k] = v;
        change = std::max(change, std::abs(v - in[k]));
      }
      return change;
    });
  }

  /// In-place sweep in node order.
  double sweep_in_place(ScalarField& u) const {
    double change = 0.0;
    for (std::size_t n = 0; n < free_.size(); ++n) {
      const std::size_t k = free_[n];
      const double v = update(n, u.values());
      change = std::max(change, std::abs(v - u[k]));
      u[k] = v;
    }
    return change;
  }

  /// Solves u = P u + b for the policy chosen at `u`; false if the linear
  /// system is singular.
  bool policy_solve(const ScalarField& u, ScalarField& out) const {
    const std::size_t n = free_.size();
    std::vector<long> slot(grid_.size(), -1);
    for (std::size_t m = 0; m < n; ++m) slot[free_[m]] = static_cast<long>(m);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(3 * n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    auto couple = [&](std::size_t row, long node, double w) {
      if (node == kBoundary || w == 0.0) return;
      const std::size_t k = static_cast<std::size_t>(node);
      if (role_[k] == Branch::Pinned) {
        rhs[static_cast<Eigen::Index>(row)] += w;
      } else if (role_[k] == Branch::Harmonic) {
        trips.emplace_back(static_cast<int>(row), static_cast<int>(slot[k]), -w);
      }
    };
    for (std::size_t m = 0; m < n; ++m) {
      Policy pol;
      update(m, u.values(), &pol);
      trips.emplace_back(static_cast<int>(m), static_cast<int>(m), 1.0);
      couple(m, pol.a, pol.wa);
      couple(m, pol.b, pol.wb);
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) return false;
    const Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) return false;
    out = u;
    for (std::size_t m = 0; m < n; ++m) {
      const double v = x[static_cast<Eigen::Index>(m)];
      if (!std::isfinite(v)) return false;
      out[free_[m]] = std::clamp(v, 0.0, 1.0);
    }
    return true;
  }

 private:
  const GridDomain& grid_;
  double lambda_;
  std::vector<Branch> role_;
  std::vector<std::size_t> free_;
  std::vector<std::size_t> start_;
  std::vector<Ray> rays_;
};

ScalarField prepared_seed(const InfProblem& problem) {
  const GridDomain& grid = *problem.grid;
  ScalarField seed;
  if (problem.seed.empty()) {
    seed = make_inf_seed(grid, SeedStrategy::Distance, problem_lambda(problem), problem.pins);
  } else {
    if (problem.seed.nx() != grid.nx() || problem.seed.ny() != grid.ny()) {
      throw InvalidParameter("seed is not aligned with the grid");
    }
    seed = problem.seed;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!grid.inside(k)) continue;
      if (!(seed[k] >= 0.0 && seed[k] <= 1.0)) throw InvalidParameter("seed values must lie in [0,1]");
    }
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.inside(k)) seed[k] = 0.0;
  }
  for (std::size_t k : problem.pins) seed[k] = 1.0;
  return seed;
}

void check_problem(const InfProblem& problem, bool need_pins) {
  if (!problem.grid) throw InvalidParameter("problem has no grid");
  if (problem.grid->inside_count() == 0) throw EmptyDomain("infinity solve on a grid with no inside nodes");
  if (need_pins && problem.pins.empty()) throw InvalidParameter("pin set must be nonempty");
  if (!(problem.tol > 0.0)) throw InvalidParameter("tol must be positive");
  if (problem.stencil != Stencil::Four && problem.stencil != Stencil::Eight) {
    throw InvalidParameter("stencil must have 4 or 8 directions");
  }
}

}  // namespace

double problem_lambda(const InfProblem& problem) {
  if (problem.lambda) {
    if (!(*problem.lambda > 0.0)) throw InvalidParameter("lambda must be positive");
    return *problem.lambda;
  }
  return lambda_inf(problem.grid->dist());
}

ScalarField inf_update(const ScalarField& field, const InfProblem& problem) {
  check_problem(problem, false);
  InfOperator op(problem);
  ScalarField out(field.nx(), field.ny(), 0.0);
  op.sweep(field, out, resolve_threads(problem.threads));
  return out;
}

double inf_residual(const ScalarField& field, const InfProblem& problem) {
  check_problem(problem, false);
  InfOperator op(problem);
  ScalarField out(field.nx(), field.ny(), 0.0);
  return op.sweep(field, out, resolve_threads(problem.threads));
}

std::vector<Branch> branch_map(const ScalarField& field, const InfProblem& problem) {
  check_problem(problem, false);
  InfOperator op(problem);
  const GridDomain& grid = *problem.grid;
  std::vector<Branch> map(grid.size(), Branch::Outside);
  for (std::size_t k = 0; k < grid.size(); ++k) map[k] = op.role(k);
  const auto& free = op.free_nodes();
  for (std::size_t n = 0; n < free.size(); ++n) map[free[n]] = op.branch_at(n, field.values());
  return map;
}

InfResult solve_inf(const InfProblem& problem) {
  check_problem(problem, true);
  const GridDomain& grid = *problem.grid;
  const unsigned threads = resolve_threads(problem.threads);
  InfOperator op(problem);

  InfResult result;
  result.lambda = op.lambda();
  result.threshold = problem.tol * grid.h();

  ScalarField u = prepared_seed(problem);
  ScalarField next = u;
  const std::vector<std::size_t> mirror =
      problem.mode == SweepMode::Jacobi ? op.mirror_map(u) : std::vector<std::size_t>{};
  ScalarField candidate, candidate_next(u.nx(), u.ny(), 0.0);
  double change = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  std::size_t next_policy = std::min<std::size_t>(20, problem.accelerate_every);
  std::size_t interval = problem.accelerate_every;

  while (iter < problem.max_iters) {
    if (problem.mode == SweepMode::Jacobi) {
      change = op.sweep(u, next, threads);
      std::swap(u, next);
    } else {
      change = op.sweep_in_place(u);
    }
    ++iter;
    if (problem.progress && problem.progress_every > 0 && iter % problem.progress_every == 0) {
      problem.progress({iter, change});
    }
    if (change <= result.threshold) break;

    if (problem.accelerate && iter >= next_policy) {
      bool improved = false;
      for (int attempt = 0; attempt < 30 && change > result.threshold; ++attempt) {
        if (!op.policy_solve(u, candidate)) break;
        if (!mirror.empty()) {
          // The sparse factorization is not equivariant; restore the exact symmetry.
          for (std::size_t k = 0; k < grid.size(); ++k) {
            if (mirror[k] > k) candidate[k] = candidate[mirror[k]] = 0.5 * (candidate[k] + candidate[mirror[k]]);
          }
        }
        // Far from the fixed point the frozen policy overshoots; back off
        // towards the current iterate until a sweep confirms progress.
        double cand_change = std::numeric_limits<double>::infinity();
        const ScalarField target = candidate;
        double theta = 1.0;
        for (int damp = 0; damp < 8; ++damp, theta *= 0.5) {
          if (damp > 0) {
            for (std::size_t k = 0; k < grid.size(); ++k) candidate[k] = u[k] + theta * (target[k] - u[k]);
          }
          cand_change = op.sweep(candidate, candidate_next, threads);
          if (cand_change < change) break;
        }
        if (!(cand_change < change)) break;
        // Keep the swept candidate: it is the next Jacobi iterate.
        u = candidate_next;
        change = cand_change;
        ++result.policy_steps;
        improved = true;
      }
      if (improved) {
        interval = problem.accelerate_every;
      } else {
        interval = std::min<std::size_t>(interval * 2, 100'000);
      }
      next_policy = iter + interval;
      if (change <= result.threshold) {
        // Confirm with a plain sweep so the reported residual is a sweep change.
        change = op.sweep(u, next, threads);
        std::swap(u, next);
        ++iter;
        if (change <= result.threshold) break;
      }
    }
  }

  result.field = std::move(u);
  result.residual = change;
  result.iterations = iter;
  result.converged = change <= result.threshold;
  result.branch_map.assign(grid.size(), Branch::Outside);
  for (std::size_t k = 0; k < grid.size(); ++k) result.branch_map[k] = op.role(k);
  const auto& free = op.free_nodes();
  for (std::size_t n = 0; n < free.size(); ++n) {
    result.branch_map[free[n]] = op.branch_at(n, result.field.values());
  }
  return result;
}

BoundReport distance_bound_check(const ScalarField& field, const GridDomain& grid) {
  BoundReport report;
  const double m = field.empty() ? 0.0 : field.max();
  const double inv = m > 0.0 ? 1.0 / m : 0.0;
  const ScalarField& dist = grid.dist();
  report.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.inside(k)) continue;
    ++report.checked;
    const double margin = field[k] * inv - (dist[k] + 2.0 * grid.h());
    report.worst_margin = std::max(report.worst_margin, margin);
    if (margin > 0.0) {
      ++report.violations;
      report.violating_nodes.push_back(k);
    }
  }
  if (report.checked == 0) report.worst_margin = 0.0;
  return report;
}

BoundReport distance_bound_check(const InfResult& result, const GridDomain& grid) {
  return distance_bound_check(result.field, grid);
}

BranchSummary branch_partition(const InfResult& result, const GridDomain& grid) {
  BranchSummary summary;
  for (auto& r : summary.regions) {
    r.xmin = r.ymin = std::numeric_limits<double>::infinity();
    r.xmax = r.ymax = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t k = 0; k < result.branch_map.size(); ++k) {
    auto& r = summary.regions[static_cast<std::size_t>(result.branch_map[k])];
    const Point x = grid.node(k);
    ++r.count;
    r.xmin = std::min(r.xmin, x.x);
    r.xmax = std::max(r.xmax, x.x);
    r.ymin = std::min(r.ymin, x.y);
    r.ymax = std::max(r.ymax, x.y);
  }
  for (auto& r : summary.regions) {
    if (r.count == 0) r.xmin = r.xmax = r.ymin = r.ymax = 0.0;
  }
  return summary;
}

std::vector<std::size_t> make_pins(const GridDomain& grid, PinStrategy strategy,
                                   const std::vector<std::size_t>& explicit_nodes) {
  std::vector<std::size_t> pins;
  switch (strategy) {
    case PinStrategy::RightRidge:
      pins = right_ridge(grid);
      break;
    case PinStrategy::FullRidge:
      pins.assign(grid.ridge().begin(), grid.ridge().end());
      break;
    case PinStrategy::Explicit:
      pins = explicit_nodes;
      for (std::size_t k : pins) {
        if (k >= grid.size() || !grid.inside(k)) {
          std::ostringstream msg;
          msg << "explicit pin node " << k << " is not an inside node";
          throw InvalidParameter(msg.str());
        }
      }
      std::sort(pins.begin(), pins.end());
      pins.erase(std::unique(pins.begin(), pins.end()), pins.end());
      break;
  }
  if (pins.empty()) throw EmptyDomain("pin set is empty (grid has no ridge)");
  return pins;
}

ScalarField make_inf_seed(const GridDomain& grid, SeedStrategy strategy, double lambda,
                          const std::vector<std::size_t>& pins, const std::optional<ScalarField>& given) {
  ScalarField seed(grid.nx(), grid.ny(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.inside(k)) continue;
    switch (strategy) {
      case SeedStrategy::Distance:
        seed[k] = std::clamp(grid.dist()[k] * lambda, 0.0, 1.0);
        break;
      case SeedStrategy::Constant:
        seed[k] = 1.0;
        break;
      case SeedStrategy::Given:
        if (!given) throw InvalidParameter("seed strategy 'given' needs a seed field");
        seed[k] = std::clamp((*given)[k], 0.0, 1.0);
        break;
    }
  }
  for (std::size_t k : pins) seed[k] = 1.0;
  return seed;
}

}  // namespace infground
