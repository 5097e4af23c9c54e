#pragma once

#include <utility>

#include "rccopf/gauss.hpp"
#include "rccopf/types.hpp"

namespace rccopf {

/// Budget uncertainty model for the wind deviation distribution parameters.
/// Per wind bus: nominal variance sigma2, symmetric mean interval
/// [-mu_half, mu_half], variance interval [sigma2 - sigma2_half,
/// sigma2 + sigma2_half]. gamma_mu / gamma_sigma in [0,1] bound the total
/// normalized deviation: sum_b |mu_b| / mu_half_b <= gamma_mu * |W| and the
/// analogue for variance.
struct WindUncertainty {
  Vector sigma2;       // nominal variances, >= 0
  Vector mu_half;      // >= 0
  Vector sigma2_half;  // 0 <= sigma2_half_b <= sigma2_b
  double gamma_mu = 0;
  double gamma_sigma = 0;

  Index size() const { return sigma2.size(); }

  /// Throws InvalidInput when any box or budget parameter is out of range.
  void validate() const;

  /// Nominal distribution (zero mean).
  GaussianSpec nominal() const { return {Vector::Zero(size()), sigma2}; }
};

/// Extremal parameter vector returned by a separation oracle, together with
/// the attained objective value. The point always satisfies the box and
/// budget constraints of its set.
struct WorstCaseResult {
  Vector point;
  double value = 0;
};

/// max_{mu in U_mu} x . mu. Greedy: deviations take the sign of x and the
/// budget is spent on buses in decreasing order of mu_half_b * |x_b|, with a
/// fractional assignment for the remainder. Ties break on bus order.
WorstCaseResult worst_case_mean(const WindUncertainty& u, const Vector& x);

/// max_{s in U_sigma2} q . s for q >= 0. Same greedy over benefit
/// sigma2_half_b * q_b; the optimum never shrinks a variance.
WorstCaseResult worst_case_variance(const WindUncertainty& u, const Vector& q);

/// Worst-case parameters of the scalar total deviation Omega = sum_b omega_b:
/// the least total mean over U_mu and the largest total variance over
/// U_sigma2. These resolve every constraint in which a single decision
/// variable multiplies Omega without any cutting planes.
struct ScalarOmegaBounds {
  double min_total_mean = 0;
  double max_total_variance = 0;
};
ScalarOmegaBounds worst_case_scalar_omega(const WindUncertainty& u);

/// Robust feasibility check of one chance constraint at x: evaluates the
/// worst-case reformulated value over U_mu x U_sigma2 via the two oracles.
/// On violation the certificate (mu*, sigma2*) feeds soc_cut.
struct RobustCheck {
  bool feasible = true;
  double violation = 0;    // worst-case h(x); feasible iff <= tol
  GaussianSpec worst;      // certificate (mu*, sigma2*)
};
RobustCheck check_robust_feasibility(const AffineGaussianConstraint& c,
                                     const WindUncertainty& u, const Vector& x,
                                     double tol = 1e-6);

}  // namespace rccopf
