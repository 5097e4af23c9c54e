#pragma once

#include <string>

#include "rccopf/types.hpp"

namespace rccopf {

/// Standard normal CDF, evaluated through erfc. Accurate to a few ulp over
/// the whole real line.
double norm_cdf(double z);

/// Inverse standard normal CDF. Rational initial guess refined by one Halley
/// step on the erfc-based CDF; |norm_cdf(result) - p| stays below 1e-9.
/// Throws InvalidInput unless 0 < p < 1.
double inv_norm_cdf(double p);

/// Diagonal Gaussian model of the wind deviation vector: one mean and one
/// variance per wind bus. Deviations at different buses are independent.
struct GaussianSpec {
  Vector mean;      // per wind bus
  Vector variance;  // per wind bus, >= 0

  Index size() const { return mean.size(); }
  double total_mean() const { return mean.sum(); }
  double total_variance() const { return variance.sum(); }
};

/// Linear map from a decision vector x to the per-wind-bus coefficients of
/// the random deviations:  c_b(x) = offset_b + row_b . x.
///
/// Two storage forms: a general sparse row matrix, or a single shared row
/// used by every bus. Constraints derived from network structure always have
/// the shared form (the per-bus parts are constants), which keeps large
/// instances small; the general form serves arbitrary constraints.
struct OmegaCoeffs {
  Vector offset;        // size |W|
  SparseVector shared;  // shared row (ignored when `general` is non-empty)
  SparseMatrix general; // |W| x n, row b = coefficient row of bus b

  Index wind_count() const { return offset.size(); }

  bool has_general() const { return general.size() != 0; }

  /// c(x) = offset + rows * x
  Vector eval(const Vector& x) const;

  /// J^T w where J is the Jacobian of c(x) in x; used for gradients.
  Vector jacobian_t(const Vector& w) const;
};

/// A single chance constraint  P( a.x + a0 + sum_b omega_b c_b(x) <= bound ) >= 1 - eps
/// with omega Gaussian. The analytic reformulation and its linearization live
/// in reformulate() and soc_cut() below.
struct AffineGaussianConstraint {
  SparseVector det_lin;  // a
  double det_const = 0;  // a0
  OmegaCoeffs omega;
  double bound = 0;
  double eps = 0;  // must lie in (0, 0.5)
  std::string label;
};

/// Value and gradient of the reformulated constraint
///   h(x) = a.x + a0 + mu.c(x) + Phi^{-1}(1-eps) sqrt(sum_b var_b c_b(x)^2) - bound
/// so that h(x) <= 0 iff the chance constraint holds under `spec`.
struct ConstraintEval {
  double value = 0;
  Vector gradient;
};

/// Evaluate h and its gradient at x. At the degenerate point where the
/// variance term vanishes the sqrt is non-differentiable; the zero
/// subgradient is used there and the constraint acts as a pure linear one.
ConstraintEval reformulate(const AffineGaussianConstraint& c,
                           const GaussianSpec& spec, const Vector& x);

/// Supporting hyperplane of the convex region { h(x) <= 0 }: tight at the
/// linearization point, valid at every feasible x.
struct SocCut {
  SparseVector coeffs;
  double rhs = 0;
  std::string label;
};

/// First-order cut  grad h(x*) . x <= grad h(x*) . x* - h(x*)  generated at an
/// infeasible point. Throws std::logic_error when h(x*) <= tol: cutting at a
/// feasible point would not separate anything and signals a caller bug.
SocCut soc_cut(const AffineGaussianConstraint& c, const GaussianSpec& spec,
               const Vector& x, double tol = 1e-9);

}  // namespace rccopf
