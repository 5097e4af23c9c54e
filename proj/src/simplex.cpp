#include "rccopf/simplex.hpp"

#include <cmath>
#include <vector>

namespace rccopf {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;

// Standard-form problem: min c.y, A y = b, y >= 0, built by translating /
// splitting the general-form variables and rows.
struct Standard {
  Matrix A;
  Vector b;
  Vector c;
  Index n_real = 0;                  // structural columns (before slacks)
  // mapping back: x_j = shift_j + sign_j * y_{col_j} (+ negative part)
  struct VarMap {
    double shift = 0;
    Index plus = -1;   // y index of the positive part
    Index minus = -1;  // y index of the negative part (free variables)
    double sign = 1;   // +1: x = shift + y ; -1: x = shift - y
  };
  std::vector<VarMap> var_map;
};

Standard to_standard_form(const LpProblem& p) {
  const Index n = p.variable_count();
  Standard s;
  s.var_map.resize(static_cast<size_t>(n));

  // Column layout for structural variables.
  Index cols = 0;
  for (Index j = 0; j < n; ++j) {
    auto& vm = s.var_map[static_cast<size_t>(j)];
    const double lo = p.var_lo[j];
    const double hi = p.var_hi[j];
    if (std::isfinite(lo)) {
      vm.shift = lo;
      vm.sign = 1;
      vm.plus = cols++;
    } else if (std::isfinite(hi)) {
      vm.shift = hi;
      vm.sign = -1;
      vm.plus = cols++;
    } else {
      vm.plus = cols++;
      vm.minus = cols++;
    }
  }
  s.n_real = cols;

  // Assemble single-sided rows: structural rows split when two-sided, plus
  // upper-bound rows for doubly-bounded variables.
  struct Row {
    SparseVector a;
    double rhs;
    int rel;  // -1: <=, 0: =, +1: >=
  };
  std::vector<Row> rows;
  for (size_t i = 0; i < p.rows.size(); ++i) {
    const double lo = p.row_lo[static_cast<Index>(i)];
    const double hi = p.row_hi[static_cast<Index>(i)];
    if (std::isfinite(lo) && std::isfinite(hi) && lo == hi) {
      rows.push_back({p.rows[i], lo, 0});
    } else {
      if (std::isfinite(hi)) rows.push_back({p.rows[i], hi, -1});
      if (std::isfinite(lo)) rows.push_back({p.rows[i], lo, +1});
    }
  }
  for (Index j = 0; j < n; ++j) {
    if (std::isfinite(p.var_lo[j]) && std::isfinite(p.var_hi[j])) {
      SparseVector a(n);
      a.insert(j) = 1.0;
      rows.push_back({a, p.var_hi[j], -1});
    }
  }

  const Index m = static_cast<Index>(rows.size());
  s.A = Matrix::Zero(m, cols);
  s.b = Vector::Zero(m);
  s.c = Vector::Zero(cols);

  for (Index j = 0; j < n; ++j) {
    const auto& vm = s.var_map[static_cast<size_t>(j)];
    s.c[vm.plus] = vm.sign * p.objective[j];
    if (vm.minus >= 0) s.c[vm.minus] = -p.objective[j];
  }

  for (Index i = 0; i < m; ++i) {
    const Row& row = rows[static_cast<size_t>(i)];
    double rhs = row.rhs;
    for (SparseVector::InnerIterator it(row.a); it; ++it) {
      const auto& vm = s.var_map[static_cast<size_t>(it.index())];
      rhs -= it.value() * vm.shift;
      s.A(i, vm.plus) += it.value() * vm.sign;
      if (vm.minus >= 0) s.A(i, vm.minus) -= it.value();
    }
    s.b[i] = rhs;
  }

  // Append slack/surplus columns.
  Index extra = 0;
  for (const Row& row : rows) {
    if (row.rel != 0) ++extra;
  }
  s.A.conservativeResize(m, cols + extra);
  s.A.rightCols(extra).setZero();
  s.c.conservativeResize(cols + extra);
  s.c.tail(extra).setZero();
  Index next = cols;
  for (Index i = 0; i < m; ++i) {
    const Row& row = rows[static_cast<size_t>(i)];
    if (row.rel == -1) s.A(i, next++) = 1.0;
    else if (row.rel == +1) s.A(i, next++) = -1.0;
  }
  return s;
}

}  // namespace

LpResult solve_lp(const LpProblem& p) {
  LpResult result;
  Standard s = to_standard_form(p);
  Index m = s.A.rows();
  Index ncols = s.A.cols();

  // Make b nonnegative.
  for (Index i = 0; i < m; ++i) {
    if (s.b[i] < 0) {
      s.A.row(i) = -s.A.row(i);
      s.b[i] = -s.b[i];
    }
  }

  // Artificial columns give the initial identity basis.
  s.A.conservativeResize(m, ncols + m);
  s.A.rightCols(m) = Matrix::Identity(m, m);
  const Index art0 = ncols;
  ncols += m;

  std::vector<Index> basis(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) basis[static_cast<size_t>(i)] = art0 + i;

  Matrix T(m, ncols);
  T = s.A;
  Vector rhs = s.b;

  auto pivot = [&](Index row, Index col) {
    const double pv = T(row, col);
    T.row(row) /= pv;
    rhs[row] /= pv;
    for (Index i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = T(i, col);
      if (f == 0.0) continue;
      T.row(i) -= f * T.row(row);
      rhs[i] -= f * rhs[row];
    }
    basis[static_cast<size_t>(row)] = col;
  };

  // Runs the simplex on objective vector `obj` over eligible columns.
  // Returns true on optimality, false on unboundedness.
  auto run = [&](const Vector& obj, Index eligible_end, bool* numerical) -> bool {
    const int bland_after = 3 * static_cast<int>(m + ncols);
    const int max_iters = 60 * static_cast<int>(m + ncols) + 2000;
    for (int iter = 0;; ++iter) {
      if (iter > max_iters) {
        *numerical = true;
        return true;
      }
      const bool bland = iter > bland_after;
      // Reduced costs: r_j = obj_j - obj_B . T_col(j)
      Vector y = Vector::Zero(m);
      for (Index i = 0; i < m; ++i) y[i] = obj[basis[static_cast<size_t>(i)]];
      Index enter = -1;
      double best = -1e-10;
      for (Index j = 0; j < eligible_end; ++j) {
        const double red = obj[j] - y.dot(T.col(j));
        if (red < -1e-10) {
          if (bland) { enter = j; break; }
          if (red < best) { best = red; enter = j; }
        }
      }
      if (enter < 0) return true;  // optimal

      Index leave = -1;
      double best_ratio = kInf;
      for (Index i = 0; i < m; ++i) {
        if (T(i, enter) > kPivotTol) {
          const double ratio = rhs[i] / T(i, enter);
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && leave >= 0 &&
               basis[static_cast<size_t>(i)] <
                   basis[static_cast<size_t>(leave)])) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
      result.iterations++;
    }
  };

  bool numerical = false;

  // Phase 1: minimize the artificial sum.
  Vector phase1 = Vector::Zero(ncols);
  phase1.tail(m).setOnes();
  // Price out the initial basis.
  run(phase1, art0, &numerical);
  if (numerical) { result.status = LpStatus::NumericalError; return result; }

  double art_sum = 0;
  for (Index i = 0; i < m; ++i) {
    if (basis[static_cast<size_t>(i)] >= art0) art_sum += rhs[i];
  }
  const double b_scale = m > 0 ? s.b.cwiseAbs().maxCoeff() : 0.0;
  if (art_sum > 1e-7 * (1.0 + b_scale)) {
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Drive remaining artificials out of the basis; a row where that is
  // impossible is redundant and gets dropped so that phase 2 cannot
  // re-inflate its artificial.
  std::vector<Index> keep;
  for (Index i = 0; i < m; ++i) {
    if (basis[static_cast<size_t>(i)] >= art0) {
      Index col = -1;
      for (Index j = 0; j < art0; ++j) {
        if (std::abs(T(i, j)) > kPivotTol) { col = j; break; }
      }
      if (col >= 0) pivot(i, col);
    }
    if (basis[static_cast<size_t>(i)] < art0) keep.push_back(i);
  }
  if (static_cast<Index>(keep.size()) < m) {
    Matrix T2(static_cast<Index>(keep.size()), ncols);
    Vector rhs2(static_cast<Index>(keep.size()));
    std::vector<Index> basis2;
    for (size_t k = 0; k < keep.size(); ++k) {
      T2.row(static_cast<Index>(k)) = T.row(keep[k]);
      rhs2[static_cast<Index>(k)] = rhs[keep[k]];
      basis2.push_back(basis[static_cast<size_t>(keep[k])]);
    }
    T = std::move(T2);
    rhs = std::move(rhs2);
    basis = std::move(basis2);
    m = static_cast<Index>(keep.size());
  }

  // Phase 2 on the real objective; artificial columns are ineligible.
  Vector phase2 = Vector::Zero(ncols);
  phase2.head(s.c.size()) = s.c;
  const bool bounded = run(phase2, art0, &numerical);
  if (numerical) { result.status = LpStatus::NumericalError; return result; }
  if (!bounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  // Recover y, then x.
  Vector y = Vector::Zero(ncols);
  for (Index i = 0; i < m; ++i) {
    if (rhs[i] < -kFeasTol) {
      result.status = LpStatus::NumericalError;
      return result;
    }
    y[basis[static_cast<size_t>(i)]] = rhs[i];
  }
  const Index n = p.variable_count();
  result.x = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    const auto& vm = s.var_map[static_cast<size_t>(j)];
    double v = vm.shift + vm.sign * y[vm.plus];
    if (vm.minus >= 0) v -= y[vm.minus];
    result.x[j] = v;
  }
  result.objective = p.objective.dot(result.x);
  result.status = LpStatus::Optimal;
  return result;
}

}  // namespace rccopf
