#include "duopt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <sstream>

#include "duopt/errors.hpp"

namespace duopt {

std::string lp_status_to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::NodeLimit: return "node_limit";
  }
  return "?";
}

std::int32_t ConcreteLP::add_var(std::string name, double lb, double ub, VarKind k) {
  obj.push_back(0.0);
  lower.push_back(lb);
  upper.push_back(ub);
  kind.push_back(k);
  names.push_back(std::move(name));
  return static_cast<std::int32_t>(obj.size()) - 1;
}

bool ConcreteLP::has_integers() const {
  for (auto k : kind)
    if (k != VarKind::Continuous) return true;
  return false;
}

bool ConcreteLP::operator==(const ConcreteLP& o) const {
  auto rows_equal = [](const std::vector<LpRow>& a, const std::vector<LpRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].coeffs != b[i].coeffs || a[i].rel != b[i].rel || a[i].rhs != b[i].rhs)
        return false;
    return true;
  };
  return sense == o.sense && obj == o.obj && obj_const == o.obj_const &&
         rows_equal(rows, o.rows) && lower == o.lower && upper == o.upper && kind == o.kind;
}

namespace {

// ---------------------------------------------------------------------------
// Dense two-phase primal simplex over the standardized system
//   min c~'z   s.t.  A~ z = b~ (b~ >= 0),  z >= 0
// Original variables are shifted (finite lower bound), mirrored (upper bound
// only) or split (free); finite upper bounds become extra rows.
// ---------------------------------------------------------------------------

struct VarMap {
  enum class Kind { Shifted, Mirrored, Split } kind = Kind::Shifted;
  std::int32_t col = -1;
  std::int32_t col_neg = -1;  // Split only
  double offset = 0.0;
};

class Simplex {
 public:
  Simplex(const ConcreteLP& lp, const SolverOptions& opts) : lp_(lp), opts_(opts) {}

  LPSolution run() {
    LPSolution sol;
    if (!build()) {
      sol.status = LpStatus::Infeasible;  // contradictory bounds
      return sol;
    }
    LpStatus st = phase1();
    sol.iterations = pivots_;
    if (st != LpStatus::Optimal) {
      sol.status = st;
      return sol;
    }
    st = phase2();
    sol.iterations = pivots_;
    sol.status = st;
    if (st != LpStatus::Optimal) return sol;
    extract(sol);
    return sol;
  }

 private:
  double& a(std::size_t i, std::size_t j) { return tab_[i * ncols_ + j]; }

  bool build() {
    const std::size_t n = static_cast<std::size_t>(lp_.num_vars());
    vmap_.resize(n);
    std::int32_t next_col = 0;
    std::vector<double> col_ub;  // finite residual upper bound per column, else inf
    for (std::size_t j = 0; j < n; ++j) {
      const double lb = lp_.lower[j], ub = lp_.upper[j];
      if (lb > ub + 1e-12) return false;
      VarMap& m = vmap_[j];
      if (lb > -kInf) {
        m.kind = VarMap::Kind::Shifted;
        m.offset = lb;
        m.col = next_col++;
        col_ub.push_back(ub < kInf ? ub - lb : kInf);
      } else if (ub < kInf) {
        m.kind = VarMap::Kind::Mirrored;
        m.offset = ub;
        m.col = next_col++;
        col_ub.push_back(kInf);
      } else {
        m.kind = VarMap::Kind::Split;
        m.col = next_col++;
        m.col_neg = next_col++;
        col_ub.push_back(kInf);
        col_ub.push_back(kInf);
      }
    }
    nstruct_ = next_col;

    // assemble rows in original-variable space, then translate columns
    struct BuildRow {
      std::vector<std::pair<std::int32_t, double>> cols;
      double rhs;
      bool is_eq;
      int orig = -1;  // index into lp_.rows, -1 for bound rows
    };
    std::vector<BuildRow> brows;
    for (std::size_t r = 0; r < lp_.rows.size(); ++r) {
      const LpRow& row = lp_.rows[r];
      BuildRow br;
      br.is_eq = row.rel == LpRel::Eq;
      br.orig = static_cast<int>(r);
      double rhs = row.rhs;
      for (const auto& [j, v] : row.coeffs) {
        const VarMap& m = vmap_[static_cast<std::size_t>(j)];
        switch (m.kind) {
          case VarMap::Kind::Shifted:
            br.cols.emplace_back(m.col, v);
            rhs -= v * m.offset;
            break;
          case VarMap::Kind::Mirrored:
            br.cols.emplace_back(m.col, -v);
            rhs -= v * m.offset;
            break;
          case VarMap::Kind::Split:
            br.cols.emplace_back(m.col, v);
            br.cols.emplace_back(m.col_neg, -v);
            break;
        }
      }
      br.rhs = rhs;
      brows.push_back(std::move(br));
    }
    for (std::int32_t col = 0; col < nstruct_; ++col) {
      if (col_ub[static_cast<std::size_t>(col)] < kInf) {
        BuildRow br;
        br.is_eq = false;
        br.cols.emplace_back(col, 1.0);
        br.rhs = col_ub[static_cast<std::size_t>(col)];
        brows.push_back(std::move(br));
      }
    }

    m_ = brows.size();
    // columns: structural | slacks (one per inequality) | artificials (as needed)
    std::size_t nslack = 0;
    for (const auto& br : brows)
      if (!br.is_eq) ++nslack;
    slack_col_.assign(m_, -1);
    art_col_.assign(m_, -1);
    row_sign_.assign(m_, 1.0);
    orig_row_.assign(m_, -1);

    std::size_t nart = 0;
    std::size_t next_slack = static_cast<std::size_t>(nstruct_);
    std::vector<std::size_t> art_rows;
    for (std::size_t i = 0; i < m_; ++i) {
      const bool neg = brows[i].rhs < 0.0;
      row_sign_[i] = neg ? -1.0 : 1.0;
      orig_row_[i] = brows[i].orig;
      if (!brows[i].is_eq) slack_col_[i] = static_cast<std::int32_t>(next_slack++);
      const bool slack_basic = !brows[i].is_eq && !neg;
      if (!slack_basic) {
        art_rows.push_back(i);
        ++nart;
      }
    }
    std::size_t next_art = static_cast<std::size_t>(nstruct_) + nslack;
    for (std::size_t i : art_rows) art_col_[i] = static_cast<std::int32_t>(next_art++);

    ncols_ = static_cast<std::size_t>(nstruct_) + nslack + nart;
    tab_.assign(m_ * ncols_, 0.0);
    b_.assign(m_, 0.0);
    basis_.assign(m_, -1);
    banned_.assign(ncols_, false);

    for (std::size_t i = 0; i < m_; ++i) {
      const double s = row_sign_[i];
      for (const auto& [col, v] : brows[i].cols) a(i, static_cast<std::size_t>(col)) += s * v;
      if (slack_col_[i] >= 0) a(i, static_cast<std::size_t>(slack_col_[i])) = s;
      if (art_col_[i] >= 0) a(i, static_cast<std::size_t>(art_col_[i])) = 1.0;
      b_[i] = s * brows[i].rhs;
      basis_[i] = art_col_[i] >= 0 ? art_col_[i] : slack_col_[i];
    }

    // standardized objective (min form)
    cost_.assign(ncols_, 0.0);
    const double sense_mul = lp_.sense == Sense::Min ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double cj = sense_mul * lp_.obj[j];
      const VarMap& m = vmap_[j];
      if (m.kind == VarMap::Kind::Mirrored) {
        cost_[static_cast<std::size_t>(m.col)] -= cj;
      } else {
        cost_[static_cast<std::size_t>(m.col)] += cj;
        if (m.kind == VarMap::Kind::Split) cost_[static_cast<std::size_t>(m.col_neg)] -= cj;
      }
    }
    return true;
  }

  void eliminate_basics(std::vector<double>& r) const {
    for (std::size_t i = 0; i < m_; ++i) {
      const double c = r[static_cast<std::size_t>(basis_[i])];
      if (c == 0.0) continue;
      for (std::size_t j = 0; j < ncols_; ++j) r[j] -= c * tab_[i * ncols_ + j];
    }
  }

  double basis_cost(const std::vector<double>& c) const {
    double v = 0.0;
    for (std::size_t i = 0; i < m_; ++i) v += c[static_cast<std::size_t>(basis_[i])] * b_[i];
    return v;
  }

  LpStatus phase1() {
    bool any_art = false;
    for (std::size_t i = 0; i < m_; ++i) any_art = any_art || art_col_[i] >= 0;
    if (any_art) {
      std::vector<double> c1(ncols_, 0.0);
      for (std::size_t i = 0; i < m_; ++i)
        if (art_col_[i] >= 0) c1[static_cast<std::size_t>(art_col_[i])] = 1.0;
      reduced_ = c1;
      eliminate_basics(reduced_);
      const LpStatus st = iterate(c1, /*phase1=*/true);
      if (st != LpStatus::Optimal) return st == LpStatus::Unbounded ? LpStatus::Infeasible : st;
      if (basis_cost(c1) > 1e-7) return LpStatus::Infeasible;
      expel_artificials();
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (art_col_[i] >= 0) banned_[static_cast<std::size_t>(art_col_[i])] = true;
    return LpStatus::Optimal;
  }

  void expel_artificials() {
    std::vector<bool> is_art(ncols_, false);
    for (std::size_t i = 0; i < m_; ++i)
      if (art_col_[i] >= 0) is_art[static_cast<std::size_t>(art_col_[i])] = true;
    for (std::size_t i = 0; i < m_; ++i) {
      if (art_col_[i] < 0 || basis_[i] != art_col_[i]) continue;
      // basic artificial at zero level: pivot any usable column in
      std::size_t enter = ncols_;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (is_art[j]) continue;
        if (std::fabs(a(i, j)) > 1e-9) {
          enter = j;
          break;
        }
      }
      if (enter == ncols_) continue;  // redundant row, artificial stays at zero
      pivot(i, enter);
    }
  }

  LpStatus phase2() {
    reduced_ = cost_;
    eliminate_basics(reduced_);
    return iterate(cost_, /*phase1=*/false);
  }

  LpStatus iterate(const std::vector<double>& c, bool phase1) {
    bool bland = false;
    std::int64_t stall = 0;
    double last_obj = basis_cost(c);
    while (true) {
      if (pivots_ >= opts_.max_pivots) return LpStatus::IterationLimit;
      const std::size_t enter = choose_entering(bland);
      if (enter == ncols_) return LpStatus::Optimal;
      const std::size_t leave = choose_leaving(enter, bland);
      if (leave == m_) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++pivots_;
      const double obj = basis_cost(c);
      if (obj < last_obj - 1e-12) {
        stall = 0;
      } else if (++stall >= opts_.stall_limit) {
        bland = true;  // anti-cycling from here on
      }
      last_obj = obj;
      (void)phase1;
    }
  }

  std::size_t choose_entering(bool bland) const {
    const double tol = opts_.opt_tol;
    if (bland) {
      for (std::size_t j = 0; j < ncols_; ++j)
        if (!banned_[j] && reduced_[j] < -tol) return j;
      return ncols_;
    }
    std::size_t best = ncols_;
    double best_val = -tol;
    for (std::size_t j = 0; j < ncols_; ++j)
      if (!banned_[j] && reduced_[j] < best_val) {
        best_val = reduced_[j];
        best = j;
      }
    return best;
  }

  std::size_t choose_leaving(std::size_t enter, bool bland) const {
    const double tol = opts_.feas_tol;
    std::size_t best = m_;
    double best_ratio = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
      const double piv = tab_[i * ncols_ + enter];
      if (piv <= tol) continue;
      const double ratio = b_[i] / piv;
      if (ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        best = i;
      } else if (ratio <= best_ratio + 1e-12 && best != m_) {
        if (bland) {
          if (basis_[i] < basis_[best]) best = i;
        } else if (lex_smaller(i, best, enter)) {
          best = i;
        }
      }
    }
    return best;
  }

  // lexicographic ratio comparison of rows i and k, both scaled by the pivot
  // column entry
  bool lex_smaller(std::size_t i, std::size_t k, std::size_t enter) const {
    const double pi = tab_[i * ncols_ + enter];
    const double pk = tab_[k * ncols_ + enter];
    for (std::size_t j = 0; j < ncols_; ++j) {
      const double vi = tab_[i * ncols_ + j] / pi;
      const double vk = tab_[k * ncols_ + j] / pk;
      if (std::fabs(vi - vk) > 1e-12) return vi < vk;
    }
    return false;
  }

  void pivot(std::size_t row, std::size_t col) {
    double* pr = &tab_[row * ncols_];
    const double piv = pr[col];
    for (std::size_t j = 0; j < ncols_; ++j) pr[j] /= piv;
    pr[col] = 1.0;
    b_[row] /= piv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      double* ri = &tab_[i * ncols_];
      const double f = ri[col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < ncols_; ++j) ri[j] -= f * pr[j];
      ri[col] = 0.0;
      b_[i] -= f * b_[row];
      if (b_[i] < 0.0 && b_[i] > -1e-11) b_[i] = 0.0;
    }
    const double f = reduced_[col];
    if (f != 0.0) {
      for (std::size_t j = 0; j < ncols_; ++j) reduced_[j] -= f * pr[j];
      reduced_[col] = 0.0;
    }
    basis_[row] = static_cast<std::int32_t>(col);
  }

  void extract(LPSolution& sol) const {
    std::vector<double> z(ncols_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) z[static_cast<std::size_t>(basis_[i])] = b_[i];
    const std::size_t n = vmap_.size();
    sol.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const VarMap& m = vmap_[j];
      switch (m.kind) {
        case VarMap::Kind::Shifted:
          sol.x[j] = m.offset + z[static_cast<std::size_t>(m.col)];
          break;
        case VarMap::Kind::Mirrored:
          sol.x[j] = m.offset - z[static_cast<std::size_t>(m.col)];
          break;
        case VarMap::Kind::Split:
          sol.x[j] = z[static_cast<std::size_t>(m.col)] - z[static_cast<std::size_t>(m.col_neg)];
          break;
      }
    }
    double v = lp_.obj_const;
    for (std::size_t j = 0; j < n; ++j) v += lp_.obj[j] * sol.x[j];
    sol.objective = v;

    // row duals in the minimization convention:
    //   inequality rows: reduced cost of the row's slack column
    //   equality rows:   row sign times the artificial's reduced cost
    sol.row_duals.assign(lp_.rows.size(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (orig_row_[i] < 0) continue;  // bound row, dual folds into the bounds
      double y = 0.0;
      if (slack_col_[i] >= 0)
        y = reduced_[static_cast<std::size_t>(slack_col_[i])];
      else if (art_col_[i] >= 0)
        y = row_sign_[i] * reduced_[static_cast<std::size_t>(art_col_[i])];
      sol.row_duals[static_cast<std::size_t>(orig_row_[i])] = y;
    }
    const double sense_mul = lp_.sense == Sense::Min ? 1.0 : -1.0;
    sol.reduced_costs.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) sol.reduced_costs[j] = sense_mul * lp_.obj[j];
    for (std::size_t r = 0; r < lp_.rows.size(); ++r)
      for (const auto& [j, vr] : lp_.rows[r].coeffs)
        sol.reduced_costs[static_cast<std::size_t>(j)] += sol.row_duals[r] * vr;
  }

  const ConcreteLP& lp_;
  const SolverOptions& opts_;
  std::vector<VarMap> vmap_;
  std::int32_t nstruct_ = 0;
  std::size_t m_ = 0, ncols_ = 0;
  std::vector<double> tab_, b_, cost_, reduced_;
  std::vector<std::int32_t> basis_, slack_col_, art_col_;
  std::vector<double> row_sign_;
  std::vector<int> orig_row_;
  std::vector<bool> banned_;
  std::int64_t pivots_ = 0;
};

}  // namespace

LPSolution solve_lp(const ConcreteLP& lp, const SolverOptions& opts) {
  if (lp.has_integers())
    fail("PreconditionFailure", "solve_lp requires a pure LP; use solve_milp");
  return Simplex(lp, opts).run();
}

namespace {

struct BnbNode {
  double bound;  // LP relaxation value in min space
  std::int64_t id;
  std::vector<double> lower, upper;
  bool operator>(const BnbNode& o) const {
    if (bound != o.bound) return bound > o.bound;
    return id > o.id;
  }
};

constexpr double kIntTol = 1e-6;

}  // namespace

LPSolution solve_milp(const ConcreteLP& lp, const SolverOptions& opts) {
  ConcreteLP relaxed = lp;
  std::fill(relaxed.kind.begin(), relaxed.kind.end(), VarKind::Continuous);
  const double sense_mul = lp.sense == Sense::Min ? 1.0 : -1.0;

  std::priority_queue<BnbNode, std::vector<BnbNode>, std::greater<BnbNode>> queue;
  queue.push({-kInf, 0, lp.lower, lp.upper});
  std::int64_t next_id = 1;

  LPSolution best;
  best.status = LpStatus::Infeasible;
  double best_val = kInf;  // min space
  std::int64_t nodes = 0;
  bool hit_limit = false;

  while (!queue.empty()) {
    BnbNode node = queue.top();
    queue.pop();
    if (node.bound >= best_val - 1e-9) continue;
    if (nodes >= opts.max_nodes) {
      hit_limit = true;
      break;
    }
    ++nodes;
    relaxed.lower = node.lower;
    relaxed.upper = node.upper;
    LPSolution rel = solve_lp(relaxed, opts);
    best.iterations += rel.iterations;
    if (rel.status == LpStatus::Unbounded) {
      best.status = LpStatus::Unbounded;
      best.x.clear();
      best.nodes = nodes;
      return best;
    }
    if (rel.status == LpStatus::IterationLimit) {
      best.status = LpStatus::IterationLimit;
      best.x.clear();
      best.nodes = nodes;
      return best;
    }
    if (rel.status != LpStatus::Optimal) continue;
    const double val = sense_mul * rel.objective;
    if (val >= best_val - 1e-9) continue;

    // most fractional integer variable, lowest index on ties
    std::int32_t frac_var = -1;
    double frac_score = -1.0;
    for (std::int32_t j = 0; j < lp.num_vars(); ++j) {
      if (lp.kind[static_cast<std::size_t>(j)] == VarKind::Continuous) continue;
      const double v = rel.x[static_cast<std::size_t>(j)];
      const double frac = v - std::floor(v);
      const double dist = std::min(frac, 1.0 - frac);
      if (dist <= kIntTol) continue;
      if (dist > frac_score + 1e-12) {
        frac_score = dist;
        frac_var = j;
      }
    }
    if (frac_var < 0) {
      best_val = val;
      best.status = LpStatus::Optimal;
      best.x = rel.x;
      for (std::int32_t j = 0; j < lp.num_vars(); ++j)
        if (lp.kind[static_cast<std::size_t>(j)] != VarKind::Continuous)
          best.x[static_cast<std::size_t>(j)] =
              std::nearbyint(best.x[static_cast<std::size_t>(j)]);
      best.objective = rel.objective;
      best.row_duals = rel.row_duals;
      best.reduced_costs = rel.reduced_costs;
      continue;
    }
    const double v = rel.x[static_cast<std::size_t>(frac_var)];
    BnbNode down{val, next_id++, node.lower, node.upper};
    down.upper[static_cast<std::size_t>(frac_var)] = std::floor(v);
    BnbNode up{val, next_id++, std::move(node.lower), std::move(node.upper)};
    up.lower[static_cast<std::size_t>(frac_var)] = std::ceil(v);
    queue.push(std::move(down));
    queue.push(std::move(up));
  }
  best.nodes = nodes;
  if (hit_limit) best.status = LpStatus::NodeLimit;  // incumbent, if any, is unproven
  return best;
}

bool verify_duality(const ConcreteLP& lp, const LPSolution& sol, double tol, std::string* why) {
  auto reject = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (sol.status != LpStatus::Optimal) return reject("solution is not optimal");
  if (sol.row_duals.size() != lp.rows.size()) return reject("missing row duals");
  const double sense_mul = lp.sense == Sense::Min ? 1.0 : -1.0;
  const std::size_t n = static_cast<std::size_t>(lp.num_vars());

  // primal feasibility and value (minimization space, constant excluded)
  double primal = 0.0;
  for (std::size_t j = 0; j < n; ++j) primal += sense_mul * lp.obj[j] * sol.x[j];
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    double act = 0.0;
    for (const auto& [j, v] : lp.rows[r].coeffs) act += v * sol.x[static_cast<std::size_t>(j)];
    const double slack = lp.rows[r].rhs - act;
    if (lp.rows[r].rel == LpRel::Le && slack < -1e-7)
      return reject("primal row violated");
    if (lp.rows[r].rel == LpRel::Eq && std::fabs(slack) > 1e-7)
      return reject("primal equality violated");
    const double y = sol.row_duals[r];
    if (lp.rows[r].rel == LpRel::Le) {
      if (y < -tol) return reject("negative dual on an inequality row");
      if (std::fabs(y * slack) > tol * (1.0 + std::fabs(primal)))
        return reject("complementary slackness violated");
    }
  }

  // reduced costs and the dual value, bounds folded in
  double dual = 0.0;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) dual -= sol.row_duals[r] * lp.rows[r].rhs;
  std::vector<double> reduced(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) reduced[j] = sense_mul * lp.obj[j];
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    for (const auto& [cj, v] : lp.rows[r].coeffs)
      reduced[static_cast<std::size_t>(cj)] += sol.row_duals[r] * v;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = reduced[j];
    if (d > tol) {
      if (lp.lower[j] <= -kInf) return reject("positive reduced cost on a lower-unbounded variable");
      dual += d * lp.lower[j];
    } else if (d < -tol) {
      if (lp.upper[j] >= kInf) return reject("negative reduced cost on an upper-unbounded variable");
      dual += d * lp.upper[j];
    }
  }
  if (std::fabs(dual - primal) > tol * (1.0 + std::fabs(primal)))
    return reject("strong duality gap " + std::to_string(dual - primal));
  return true;
}

namespace {

std::string mps_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void mps_line(std::ostream& out, const std::string& f1, const std::string& f2,
              const std::string& f3 = "", const std::string& f4 = "", const std::string& f5 = "",
              const std::string& f6 = "") {
  std::string line = " " + f1;
  auto pad_to = [&](std::size_t col) {
    while (line.size() < col) line += ' ';
  };
  pad_to(4);
  line += f2;
  if (!f3.empty()) {
    pad_to(14);
    line += f3;
  }
  if (!f4.empty()) {
    pad_to(24);
    line += f4;
  }
  if (!f5.empty()) {
    pad_to(39);
    line += f5;
  }
  if (!f6.empty()) {
    pad_to(49);
    line += f6;
  }
  out << line << "\n";
}

}  // namespace

void write_mps(const ConcreteLP& lp, std::ostream& out, const std::string& name) {
  auto row_name = [](std::size_t r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "R%07zu", r + 1);
    return std::string(buf);
  };
  auto col_name = [](std::size_t c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "C%07zu", c + 1);
    return std::string(buf);
  };
  out << "NAME          " << name << "\n";
  if (lp.sense == Sense::Max) out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n";
  mps_line(out, "N", "OBJ");
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    mps_line(out, lp.rows[r].rel == LpRel::Le ? "L" : "E", row_name(r));

  // column-major view of the row coefficients
  const std::size_t n = static_cast<std::size_t>(lp.num_vars());
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(n);
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    for (const auto& [j, v] : lp.rows[r].coeffs)
      cols[static_cast<std::size_t>(j)].emplace_back(r, v);

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool is_int = lp.kind[j] != VarKind::Continuous;
    if (is_int != in_int) {
      mps_line(out, "", "MARKER" + std::to_string(marker++), "'MARKER'", "",
               is_int ? "'INTORG'" : "'INTEND'");
      in_int = is_int;
    }
    if (lp.obj[j] != 0.0) mps_line(out, "", col_name(j), "OBJ", mps_num(lp.obj[j]));
    for (const auto& [r, v] : cols[j]) mps_line(out, "", col_name(j), row_name(r), mps_num(v));
    if (lp.obj[j] == 0.0 && cols[j].empty())
      mps_line(out, "", col_name(j), "OBJ", "0");
  }
  if (in_int)
    mps_line(out, "", "MARKER" + std::to_string(marker++), "'MARKER'", "", "'INTEND'");

  out << "RHS\n";
  if (lp.obj_const != 0.0) mps_line(out, "", "RHS", "OBJ", mps_num(-lp.obj_const));
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    if (lp.rows[r].rhs != 0.0) mps_line(out, "", "RHS", row_name(r), mps_num(lp.rows[r].rhs));

  out << "BOUNDS\n";
  for (std::size_t j = 0; j < n; ++j) {
    const double lb = lp.lower[j], ub = lp.upper[j];
    if (lp.kind[j] == VarKind::Binary) {
      mps_line(out, "BV", "BND", col_name(j));
      continue;
    }
    if (lb <= -kInf && ub >= kInf) {
      mps_line(out, "FR", "BND", col_name(j));
      continue;
    }
    if (lb <= -kInf) mps_line(out, "MI", "BND", col_name(j));
    else if (lb != 0.0) mps_line(out, "LO", "BND", col_name(j), mps_num(lb));
    if (ub < kInf) mps_line(out, "UP", "BND", col_name(j), mps_num(ub));
  }
  out << "ENDATA\n";
}

std::string to_mps(const ConcreteLP& lp, const std::string& name) {
  std::ostringstream out;
  write_mps(lp, out, name);
  return out.str();
}

}  // namespace duopt
