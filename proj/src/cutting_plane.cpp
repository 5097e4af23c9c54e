#include "rccopf/cutting_plane.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "rccopf/uncertainty.hpp"

namespace rccopf {

namespace {

// Evaluates one chance constraint at x under the model's mode: nominal
// reformulation for CC, worst case over the uncertainty set for RCC. On
// violation the cut is linearized at the certificate distribution.
void check_one(const OpfModel& model, const AffineGaussianConstraint& c,
               const Vector& x, double tol, SeparationResult& out, bool is_gen) {
  double violation;
  GaussianSpec cut_spec;
  if (model.mode == OpfMode::Robust) {
    const RobustCheck check = check_robust_feasibility(c, model.uncertainty_pu, x, tol);
    violation = check.violation;
    cut_spec = check.worst;
  } else {
    violation = reformulate(c, model.nominal_pu, x).value;
    cut_spec = model.nominal_pu;
  }
  out.max_violation = std::max(out.max_violation, violation);
  if (violation > tol) {
    out.cuts.push_back(soc_cut(c, cut_spec, x, tol));
    out.violations.push_back(violation);
    (is_gen ? out.gen_cuts : out.line_cuts) += 1;
  }
}

}  // namespace

SeparationResult separation_round(const OpfModel& model, const Vector& x,
                                  double tol, bool include_gen_records) {
  SeparationResult out;
  if (model.mode == OpfMode::Deterministic) return out;
  for (const AffineGaussianConstraint& c : model.line_chance) {
    check_one(model, c, x, tol, out, false);
  }
  if (include_gen_records) {
    for (const GenChanceConstraint& rec : model.gen_chance) {
      check_one(model, gen_chance_as_constraint(model, rec), x, tol, out, true);
    }
  }
  return out;
}

CuttingPlaneOutcome solve_cutting_plane(const OpfModel& model,
                                        const CuttingPlaneConfig& config) {
  if (config.feasibility_tol <= 0) throw InvalidInput("feasibility tolerance must be > 0");
  if (config.max_iterations < 1) throw InvalidInput("max iterations must be >= 1");

  const auto t_start = std::chrono::steady_clock::now();
  CuttingPlaneOutcome out;
  SolveDiagnostics diag;

  auto master = make_master_solver(config.master_backend, config.pwl_segments);
  master->set_feasibility_tolerance(
      std::max(config.feasibility_tol / 100.0, 1e-12));
  master->load(lower_to_master(model, config.force_gen_cuts));

  Vector x;
  int stalled_rounds = 0;
  std::string termination;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    diag.iterations = iter;
    const MasterStatus status = master->solve();
    diag.master_solves += 1;
    if (status != MasterStatus::Optimal) {
      out.master_status = status;
      termination = status == MasterStatus::Infeasible ? "master-infeasible"
                                                       : "master-error";
      break;
    }
    x = master->point();
    diag.objective_sequence.push_back(master->objective());

    SeparationResult sep = separation_round(model, x, config.feasibility_tol,
                                            config.force_gen_cuts);
    diag.final_max_violation = sep.max_violation;
    if (sep.cuts.empty()) {
      out.converged = true;
      termination = "converged";
      break;
    }

    // Optionally keep only the most violated cuts this round.
    std::vector<size_t> order(sep.cuts.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return sep.violations[a] > sep.violations[b];
    });
    const size_t keep = config.max_cuts_per_round > 0
                            ? std::min(order.size(),
                                       static_cast<size_t>(config.max_cuts_per_round))
                            : order.size();
    for (size_t k = 0; k < keep; ++k) {
      const SocCut& cut = sep.cuts[order[k]];
      master->add_constraint({cut.coeffs, -kInf, cut.rhs, cut.label});
      diag.cut_labels.push_back(cut.label);
      diag.cuts_added[cut.label.rfind("gen", 0) == 0 ? "generator" : "line"] += 1;
      out.cuts.push_back(cut);
    }

    // Stall guard: cuts keep arriving but the relaxation stopped moving.
    const auto& seq = diag.objective_sequence;
    if (config.objective_stall_tol > 0 && seq.size() >= 2 &&
        std::abs(seq.back() - seq[seq.size() - 2]) <=
            config.objective_stall_tol * (1.0 + std::abs(seq.back()))) {
      if (++stalled_rounds >= 10) {
        termination = "iteration-limit";
        break;
      }
    } else {
      stalled_rounds = 0;
    }
  }
  if (termination.empty()) termination = "iteration-limit";

  diag.termination = termination;
  diag.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  if (out.master_status == MasterStatus::Optimal && x.size() > 0) {
    out.solution = recover_solution(model, x);
  }
  out.solution.diagnostics = diag;
  out.diagnostics = std::move(diag);
  return out;
}

}  // namespace rccopf
