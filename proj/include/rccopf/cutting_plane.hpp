#pragma once

#include <string>
#include <vector>

#include "rccopf/master.hpp"
#include "rccopf/model.hpp"

namespace rccopf {

struct CuttingPlaneConfig {
  double feasibility_tol = 1e-6;  // per-unit chance-constraint violation
  int max_iterations = 200;
  int max_cuts_per_round = 0;        // 0: one cut per violated constraint
  double objective_stall_tol = 0.0;  // 0: disabled
  std::string master_backend = "qp";
  int pwl_segments = 20;
  /// Route the generator-side constraints through the separation oracle
  /// instead of their resolved linear rows (cross-check path).
  bool force_gen_cuts = false;
};

/// One separation pass over the model's chance constraints at x.
struct SeparationResult {
  std::vector<SocCut> cuts;        // one per violated constraint
  std::vector<double> violations;  // parallel to cuts
  double max_violation = 0;        // across all checked constraints
  int line_cuts = 0;
  int gen_cuts = 0;
};
SeparationResult separation_round(const OpfModel& model, const Vector& x,
                                  double tol = 1e-6,
                                  bool include_gen_records = false);

struct CuttingPlaneOutcome {
  DispatchSolution solution;
  SolveDiagnostics diagnostics;
  MasterStatus master_status = MasterStatus::Optimal;
  bool converged = false;
  std::vector<SocCut> cuts;  // every cut added, in order
};

/// Fig.-style loop: solve the relaxation, check the (robust) chance
/// constraints, add one linearization per violated constraint, repeat. On
/// the iteration limit the best relaxation point is returned flagged
/// non-converged; master infeasibility is propagated with the accumulated
/// cut labels for debugging.
CuttingPlaneOutcome solve_cutting_plane(const OpfModel& model,
                                        const CuttingPlaneConfig& config = {});

}  // namespace rccopf
