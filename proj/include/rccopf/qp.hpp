#pragma once

#include <vector>

#include "rccopf/types.hpp"

namespace rccopf {

enum class QpStatus { Optimal, Infeasible, NumericalError };

struct QpResult {
  QpStatus status = QpStatus::NumericalError;
  Vector x;
  double objective = 0;
  int active_set_iterations = 0;
  std::vector<int> active_inequalities;  // indices into the inequality list
};

/// Dense convex QP solved by the dual active-set method:
///
///   minimize 0.5 x'Gx + g'x
///   s.t.     E x  = e          (rows given as sparse columns)
///            C x >= c
///
/// G must be positive definite; it is factored once per set_objective and
/// the factorization is reused across solves. Inequalities can be appended
/// between solves, which is how cutting planes reach the master problem.
/// Each solve starts from the unconstrained minimum and activates violated
/// constraints one at a time; infeasibility is detected as an unbounded dual
/// step.
class QpSolver {
 public:
  /// Throws InvalidInput if G is not positive definite.
  void set_objective(const Matrix& G, const Vector& g);

  /// Constraint satisfaction tolerance of the violation scan (relative to
  /// 1 + |rhs|). Must stay well below the tolerance of whoever separates
  /// cuts on top of this solver.
  void set_feasibility_tolerance(double tol) { feas_tol_ = tol; }

  void set_equalities(std::vector<SparseVector> rows, Vector rhs);
  void set_inequalities(std::vector<SparseVector> rows, Vector rhs);
  void add_inequality(SparseVector row, double rhs);

  Index variable_count() const { return n_; }
  Index inequality_count() const { return static_cast<Index>(ineq_rows_.size()); }

  QpResult solve() const;

 private:
  Index n_ = 0;
  Matrix g_matrix_;
  Vector g_lin_;
  Eigen::LLT<Matrix> llt_;
  Matrix j0_;  // inverse transpose of the Cholesky factor
  std::vector<SparseVector> eq_rows_;
  Vector eq_rhs_;
  std::vector<SparseVector> ineq_rows_;
  std::vector<double> ineq_rhs_;
  double feas_tol_ = 1e-9;
};

}  // namespace rccopf
