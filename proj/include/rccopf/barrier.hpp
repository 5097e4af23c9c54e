#pragma once

#include "rccopf/model.hpp"

namespace rccopf {

struct BarrierConfig {
  double gap_tol = 1e-8;    // target duality measure, relative to |objective|
  double t_growth = 20.0;   // barrier parameter multiplier per outer step
  int max_newton = 2000;    // total Newton iterations across the path
};

struct BarrierOutcome {
  bool feasible = false;
  DispatchSolution solution;
  int newton_steps = 0;
};

/// Direct solve of the nominal CC model: every line chance constraint enters
/// through its analytic conic reformulation and the whole problem is solved
/// by a primal log-barrier path-following method. Serves as the second,
/// algorithmically independent route next to the cutting-plane solver.
/// Throws InvalidInput for robust models, which have no such compact
/// deterministic reformulation.
BarrierOutcome solve_socp_direct(const OpfModel& model,
                                 const BarrierConfig& config = {});

}  // namespace rccopf
