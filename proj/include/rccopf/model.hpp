#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rccopf/gauss.hpp"
#include "rccopf/grid.hpp"
#include "rccopf/sensitivities.hpp"
#include "rccopf/types.hpp"
#include "rccopf/uncertainty.hpp"

namespace rccopf {

enum class OpfMode { Deterministic, NominalCc, Robust };

/// Linear row over the master decision vector: lo <= coeffs.x <= hi.
/// Equal bounds make an equality.
struct LinearRow {
  SparseVector coeffs;
  double lo = -kInf;
  double hi = kInf;
  std::string label;
};

enum class GenChanceKind { MaxOutput, MinOutput, RampUp, RampDown };

/// Generator-side chance constraint in structural form. A single decision
/// variable multiplies the scalar total deviation, so the constraint resolves
/// to one linear row without any cutting planes; the record is kept so the
/// cutting-plane route stays available for cross-checks.
struct GenChanceConstraint {
  int gen = 0;
  GenChanceKind kind = GenChanceKind::MaxOutput;
  double eps = kDefaultGenEps;
};

/// Master variable layout. The network quantities theta, delta and f are not
/// master variables: they are recovered from (p, alpha) through the reduced
/// admittance factorization, with the reference entries fixed to zero.
struct DecisionLayout {
  Index n_vars = 0;
  std::vector<int> p_index;         // per generator; -1 = fixed output
  std::vector<double> p_fixed_pu;   // value when fixed (0 when out of service)
  std::vector<int> alpha_index;     // per generator; -1 = fixed factor
  std::vector<double> alpha_fixed;  // reference-bus generators pin to 0
  int shared_alpha = -1;            // index of the common participation variable
  std::vector<char> in_service;     // per generator
};

struct SolveDiagnostics {
  int iterations = 0;
  int master_solves = 0;
  std::map<std::string, int> cuts_added;  // per constraint family
  std::vector<std::string> cut_labels;    // all cuts, in the order added
  double wall_seconds = 0;
  double final_max_violation = 0;
  std::vector<double> objective_sequence;
  std::string termination;  // converged | iteration-limit | master-infeasible | master-error
};

struct DispatchSolution {
  Vector p_mw;       // per generator
  Vector alpha;      // per generator, sums to one in CC/RCC modes
  Vector theta;      // per bus, radians
  Vector delta;      // per bus
  Vector flows_mw;   // per line
  double objective = 0;  // expected hourly production cost, $
  SolveDiagnostics diagnostics;
};

/// Structured optimization model shared by the three formulations. All
/// numeric data is per-unit on the case base; the objective is in dollars.
struct OpfModel {
  OpfMode mode = OpfMode::Deterministic;
  const GridCase* grid = nullptr;  // must outlive the model
  std::shared_ptr<const NetworkSensitivities> sens;
  DecisionLayout layout;

  // sum_j obj_quad[j] x_j^2 + obj_lin[j] x_j + obj_const
  Vector obj_quad;
  Vector obj_lin;
  double obj_const = 0;
  double var_omega_pu = 0;  // var(Omega) used in the objective

  std::vector<LinearRow> equalities;
  std::vector<LinearRow> inequalities;        // bounds + forecast line limits
  std::vector<LinearRow> resolved_gen_rows;   // linear form of gen_chance
  std::vector<GenChanceConstraint> gen_chance;
  std::vector<AffineGaussianConstraint> line_chance;
  std::vector<int> monitored;  // line indices carrying limits

  GaussianSpec nominal_pu;         // per wind farm, per-unit
  WindUncertainty uncertainty_pu;  // Robust mode only

  Index chance_constraint_count() const {
    return static_cast<Index>(gen_chance.size() + line_chance.size());
  }
};

struct BuildOptions {
  /// Use the worst-case total variance instead of the nominal one in the
  /// var(Omega) objective term. Off by default: the objective keeps the
  /// nominal value even in robust mode.
  bool robust_objective_variance = false;
};

/// Single-period dispatch at the forecast, no participation factors.
OpfModel build_deterministic(const GridCase& grid,
                             std::shared_ptr<const NetworkSensitivities> sens = nullptr);

/// Chance-constrained dispatch under a known Gaussian deviation model.
/// `spec_mw` is in MW / MW^2 per wind farm (ordered as grid.wind_farms).
OpfModel build_cc(const GridCase& grid, const GaussianSpec& spec_mw,
                  std::shared_ptr<const NetworkSensitivities> sens = nullptr);

/// Distributionally robust chance-constrained dispatch over budget
/// uncertainty sets on the deviation parameters. `u_mw` in MW units.
OpfModel build_rcc(const GridCase& grid, const WindUncertainty& u_mw,
                   std::shared_ptr<const NetworkSensitivities> sens = nullptr,
                   const BuildOptions& options = {});

/// Compact-space chance-constraint form of a generator-side record, for
/// routing those constraints through the separation machinery.
AffineGaussianConstraint gen_chance_as_constraint(const OpfModel& model,
                                                  const GenChanceConstraint& rec);

/// Rebuilds the full network solution (theta, delta, flows) from a master
/// point and prices it.
DispatchSolution recover_solution(const OpfModel& model, const Vector& x);

/// Value of the master objective at x, including the constant term.
double master_objective(const OpfModel& model, const Vector& x);

/// Inverse of recover_solution: the master point corresponding to a
/// dispatch (per-unit outputs and participation factors).
Vector master_point(const OpfModel& model, const DispatchSolution& solution);

}  // namespace rccopf
