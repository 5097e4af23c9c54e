#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rccopf/model.hpp"
#include "rccopf/types.hpp"

namespace rccopf {

/// Relaxation handed to a master backend: the quadratic-diagonal objective
/// plus linear rows. Chance constraints are absent; they arrive later as
/// cuts.
struct MasterProblem {
  Vector obj_quad;  // coefficient of x_j^2
  Vector obj_lin;
  double obj_const = 0;
  std::vector<LinearRow> equalities;
  std::vector<LinearRow> inequalities;

  Index variable_count() const { return obj_quad.size(); }
};

enum class MasterStatus { Optimal, Infeasible, Error };

/// Plug-in seam for the relaxation solver of the cutting-plane loop.
/// Backends declare what objectives they can represent; constraint rows can
/// be appended between solves.
class MasterSolver {
 public:
  struct Capabilities {
    bool quadratic_objective = false;
    bool linear_objective = true;
    bool warm_start = false;  // false: documented cold re-solve per round
  };

  virtual ~MasterSolver() = default;
  virtual Capabilities capabilities() const = 0;
  /// Row-satisfaction tolerance the backend must reach; defaults keep the
  /// relaxation an order tighter than the separation oracle.
  virtual void set_feasibility_tolerance(double) {}
  virtual void load(const MasterProblem& problem) = 0;
  virtual void add_constraint(const LinearRow& cut) = 0;
  virtual MasterStatus solve() = 0;
  virtual const Vector& point() const = 0;
  virtual double objective() const = 0;  // includes the constant term
};

/// Registry keyed by backend name. Built-ins: "qp" (dense dual active set,
/// exact quadratic objective) and "lp" (piecewise-linear objective over the
/// two-phase simplex; `pwl_segments` tangents per quadratic variable).
std::unique_ptr<MasterSolver> make_master_solver(const std::string& backend,
                                                 int pwl_segments = 20);
std::vector<std::string> master_backends();
void register_master_backend(
    const std::string& name,
    std::function<std::unique_ptr<MasterSolver>(int)> factory);

/// Flattens an OpfModel into the master relaxation. Generator-side chance
/// constraints enter as their resolved linear rows unless `force_gen_cuts`
/// routes them through the separation oracle instead.
MasterProblem lower_to_master(const OpfModel& model, bool force_gen_cuts = false);

}  // namespace rccopf
