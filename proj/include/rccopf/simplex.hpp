#pragma once

#include <vector>

#include "rccopf/types.hpp"

namespace rccopf {

/// General-form linear program:
///   minimize c.x  s.t.  row_lo <= A x <= row_hi,  var_lo <= x <= var_hi.
/// Equal row bounds make an equality; infinities drop a side.
struct LpProblem {
  Vector objective;
  std::vector<SparseVector> rows;
  Vector row_lo;
  Vector row_hi;
  Vector var_lo;
  Vector var_hi;

  Index variable_count() const { return objective.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalError };

struct LpResult {
  LpStatus status = LpStatus::NumericalError;
  Vector x;
  double objective = 0;
  int iterations = 0;
};

/// Two-phase dense tableau simplex with Bland's rule as the anti-cycling
/// fallback. Intended for small and mid-sized problems (piecewise-linear
/// master fallback, polytope oracles, tests).
LpResult solve_lp(const LpProblem& problem);

}  // namespace rccopf
