#pragma once

// Independent reference implementations the spec-level checks compare
// against. Everything here is deliberately brute force and shares no code
// with the library paths it validates.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "duopt/linear_model.hpp"
#include "duopt/lp.hpp"
#include "duopt/tensor.hpp"

namespace duopt::testing {

// --------------------------------------------------------------------------
// broadcasting oracle: shapes combined by explicit per-dimension modulo
// indexing instead of strides
// --------------------------------------------------------------------------

inline std::optional<Shape> naive_broadcast_shape(Shape a, Shape b) {
  while (a.size() < b.size()) a.insert(a.begin(), 1);
  while (b.size() < a.size()) b.insert(b.begin(), 1);
  Shape out(a.size());
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (a[d] != b[d] && a[d] != 1 && b[d] != 1) return std::nullopt;
    out[d] = std::max(a[d], b[d]);
  }
  return out;
}

inline double naive_broadcast_read(const Tensor& t, const Shape& out_shape,
                                   const std::vector<std::int64_t>& out_index) {
  const std::size_t pad = out_shape.size() - t.shape().size();
  std::int64_t flat = 0;
  for (std::size_t d = 0; d < t.shape().size(); ++d) {
    const std::int64_t idx = out_index[pad + d] % t.shape()[d];
    flat = flat * t.shape()[d] + idx;
  }
  return t.flat(flat);
}

template <typename F>
Tensor naive_broadcast_zip(const Tensor& a, const Tensor& b, F&& f) {
  const auto shape = naive_broadcast_shape(a.shape(), b.shape());
  Tensor out(*shape);
  std::vector<std::int64_t> idx(shape->size(), 0);
  for (std::int64_t flat = 0; flat < out.size(); ++flat) {
    out.flat(flat) = f(naive_broadcast_read(a, *shape, idx), naive_broadcast_read(b, *shape, idx));
    for (int d = static_cast<int>(shape->size()) - 1; d >= 0; --d) {
      if (++idx[d] < (*shape)[d]) break;
      idx[d] = 0;
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// vertex-enumeration LP oracle: try every choice of n active constraints
// from {rows, bounds}, solve the square system, keep the best feasible point
// --------------------------------------------------------------------------

struct VertexOracleResult {
  bool feasible = false;
  bool bounded = true;  // meaningful only over box-bounded instances
  double objective = 0.0;
  std::vector<double> x;
};

inline bool gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-10) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

inline VertexOracleResult vertex_enumeration(const ConcreteLP& lp, double feas_tol = 1e-7) {
  const std::size_t n = static_cast<std::size_t>(lp.num_vars());
  // candidate hyperplanes: every row plus both finite bounds of every
  // variable; feasibility filtering makes forcing equalities unnecessary
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (const auto& row : lp.rows) {
    Plane p{std::vector<double>(n, 0.0), row.rhs};
    for (const auto& [j, v] : row.coeffs) p.a[static_cast<std::size_t>(j)] = v;
    planes.push_back(std::move(p));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (lp.lower[j] > -kInf) {
      Plane p{std::vector<double>(n, 0.0), lp.lower[j]};
      p.a[j] = 1.0;
      planes.push_back(std::move(p));
    }
    if (lp.upper[j] < kInf) {
      Plane p{std::vector<double>(n, 0.0), lp.upper[j]};
      p.a[j] = 1.0;
      planes.push_back(std::move(p));
    }
  }
  const double sense_mul = lp.sense == Sense::Min ? 1.0 : -1.0;
  VertexOracleResult best;
  std::vector<std::size_t> pick;
  auto feasible_at = [&](const std::vector<double>& x) {
    for (std::size_t j = 0; j < n; ++j) {
      if (lp.lower[j] > -kInf && x[j] < lp.lower[j] - feas_tol) return false;
      if (lp.upper[j] < kInf && x[j] > lp.upper[j] + feas_tol) return false;
    }
    for (const auto& row : lp.rows) {
      double act = 0.0;
      for (const auto& [j, v] : row.coeffs) act += v * x[static_cast<std::size_t>(j)];
      if (row.rel == LpRel::Le && act > row.rhs + feas_tol) return false;
      if (row.rel == LpRel::Eq && std::fabs(act - row.rhs) > feas_tol) return false;
    }
    return true;
  };
  auto consider = [&](const std::vector<std::size_t>& active) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (auto i : active) {
      a.push_back(planes[i].a);
      b.push_back(planes[i].b);
    }
    std::vector<double> x;
    if (!gauss_solve(std::move(a), std::move(b), x)) return;
    if (!feasible_at(x)) return;
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += sense_mul * lp.obj[j] * x[j];
    if (!best.feasible || v < best.objective) {
      best.feasible = true;
      best.objective = v;
      best.x = x;
    }
  };
  // recursive enumeration of every size-n hyperplane subset
  std::vector<std::size_t> chosen;
  auto recurse = [&](auto&& self, std::size_t from) -> void {
    if (chosen.size() == n) {
      consider(chosen);
      return;
    }
    if (planes.size() - from < n - chosen.size()) return;
    for (std::size_t i = from; i < planes.size(); ++i) {
      chosen.push_back(i);
      self(self, i + 1);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0);
  if (best.feasible) best.objective = sense_mul * best.objective + lp.obj_const;
  return best;
}

// --------------------------------------------------------------------------
// box worst case of a bi-affine body by explicit enumeration of all 2^d
// vertices (the exact maximum of an affine-in-p function over a box)
// --------------------------------------------------------------------------

inline double box_vertex_max(const BiAffineScalar& body, const std::vector<double>& lower,
                             const std::vector<double>& upper, const std::vector<double>& x) {
  const std::size_t d = lower.size();
  double best = -kInf;
  std::vector<double> p(d, 0.0);
  for (std::size_t mask = 0; mask < (std::size_t(1) << d); ++mask) {
    for (std::size_t k = 0; k < d; ++k) p[k] = (mask >> k) & 1 ? upper[k] : lower[k];
    best = std::max(best, body.value_at(x, p));
  }
  return best;
}

// --------------------------------------------------------------------------
// discretized optimal-transport oracle for the worst-case expectation over a
// type-1 Wasserstein ball: maximize sum_i sum_g gamma_ig * l(p_g) subject to
// per-sample mass 1/N and a total transport budget
// --------------------------------------------------------------------------

struct OtOracleConfig {
  double radius = 0.0;
  bool linf_ground = false;  // default L1 ground distance
  double grid_step = 0.0;
  double margin = 0.0;  // grid extends this far beyond the sample hull
};

inline double ot_worst_case_expectation(const std::vector<std::vector<double>>& samples,
                                        const std::vector<double>& coeff, double offset,
                                        const OtOracleConfig& cfg) {
  const std::size_t dim = coeff.size();
  const std::size_t n = samples.size();
  std::vector<double> lo(dim, kInf), hi(dim, -kInf);
  for (const auto& s : samples)
    for (std::size_t d = 0; d < dim; ++d) {
      lo[d] = std::min(lo[d], s[d]);
      hi[d] = std::max(hi[d], s[d]);
    }
  std::vector<std::vector<double>> axes(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    for (double v = lo[d] - cfg.margin; v <= hi[d] + cfg.margin + 1e-12; v += cfg.grid_step)
      axes[d].push_back(v);
  }
  std::vector<std::size_t> counts(dim);
  std::size_t n_grid = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    counts[d] = axes[d].size();
    n_grid *= counts[d];
  }

  ConcreteLP lp;
  lp.sense = Sense::Max;
  lp.obj.assign(n * n_grid, 0.0);
  lp.lower.assign(n * n_grid, 0.0);
  lp.upper.assign(n * n_grid, kInf);
  lp.kind.assign(n * n_grid, VarKind::Continuous);
  lp.names.resize(n * n_grid);
  std::vector<double> point(dim);
  LpRow budget;
  budget.rel = LpRel::Le;
  budget.rhs = cfg.radius;
  std::vector<LpRow> mass(n);
  for (std::size_t i = 0; i < n; ++i) {
    mass[i].rel = LpRel::Eq;
    mass[i].rhs = 1.0 / static_cast<double>(n);
  }
  for (std::size_t g = 0; g < n_grid; ++g) {
    std::size_t rem = g;
    for (std::size_t d = 0; d < dim; ++d) {
      point[d] = axes[d][rem % counts[d]];
      rem /= counts[d];
    }
    double value = offset;
    for (std::size_t d = 0; d < dim; ++d) value += coeff[d] * point[d];
    for (std::size_t i = 0; i < n; ++i) {
      const auto col = static_cast<std::int32_t>(i * n_grid + g);
      lp.obj[static_cast<std::size_t>(col)] = value;
      double dist = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double delta = std::fabs(point[d] - samples[i][d]);
        dist = cfg.linf_ground ? std::max(dist, delta) : dist + delta;
      }
      mass[i].coeffs.emplace_back(col, 1.0);
      if (dist != 0.0) budget.coeffs.emplace_back(col, dist);
    }
  }
  for (auto& row : mass) lp.rows.push_back(std::move(row));
  lp.rows.push_back(std::move(budget));
  SolverOptions opts;
  opts.max_pivots = 200000;
  const LPSolution sol = solve_lp(lp, opts);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("transport oracle LP did not solve");
  return sol.objective;
}

// --------------------------------------------------------------------------
// evaluate the violation a reformulated LP assigns to a fixed decision: the
// auxiliary variables are set to the smallest values their defining rows
// allow, then the main rows are checked
// --------------------------------------------------------------------------

inline double reformulated_violation(const ConcreteLP& lp, const std::vector<double>& x,
                                     std::size_t n_decisions) {
  std::vector<double> full(static_cast<std::size_t>(lp.num_vars()), 0.0);
  for (std::size_t j = 0; j < n_decisions; ++j) full[j] = x[j];
  // aux variables: lower bound implied by rows where they appear with a
  // negative coefficient and every other variable is known
  for (std::size_t j = n_decisions; j < full.size(); ++j) {
    double t = lp.lower[j] > -kInf ? lp.lower[j] : 0.0;
    for (const auto& row : lp.rows) {
      if (row.info.kind != RowInfo::Kind::AuxAbs && row.info.kind != RowInfo::Kind::AuxMax)
        continue;
      double self_coeff = 0.0;
      double rest = 0.0;
      bool involves = false;
      bool ready = true;
      for (const auto& [col, v] : row.coeffs) {
        if (static_cast<std::size_t>(col) == j) {
          self_coeff = v;
          involves = true;
        } else if (static_cast<std::size_t>(col) < n_decisions) {
          rest += v * full[static_cast<std::size_t>(col)];
        } else {
          ready = false;  // aux-on-aux rows are not produced by the builders
        }
      }
      if (!involves || !ready || self_coeff >= 0.0) continue;
      // rest + self_coeff * t <= rhs  ->  t >= (rest - rhs) / (-self_coeff)
      t = std::max(t, (rest - row.rhs) / (-self_coeff));
    }
    full[j] = t;
  }
  double worst = 0.0;
  for (const auto& row : lp.rows) {
    if (row.info.kind == RowInfo::Kind::AuxAbs || row.info.kind == RowInfo::Kind::AuxMax)
      continue;
    double act = 0.0;
    for (const auto& [col, v] : row.coeffs) act += v * full[static_cast<std::size_t>(col)];
    const double viol = row.rel == LpRel::Le ? act - row.rhs : std::fabs(act - row.rhs);
    worst = std::max(worst, viol);
  }
  return std::max(0.0, worst);
}

}  // namespace duopt::testing
