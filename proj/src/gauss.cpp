#include "rccopf/gauss.hpp"

#include <cmath>
#include <numbers>

namespace rccopf {

double norm_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2_v<double>);
}

namespace {

// Rational approximation of the standard normal quantile (Acklam's
// coefficients); relative error below 1.2e-9 on (0,1) before refinement.
double quantile_estimate(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidInput("inv_norm_cdf: probability must lie strictly in (0,1), got " +
                       std::to_string(p));
  }
  double x = quantile_estimate(p);
  // One Halley step against the erfc-based CDF.
  const double err = norm_cdf(x) - p;
  const double u =
      err * std::numbers::sqrt2_v<double> * std::sqrt(std::numbers::pi_v<double>) *
      std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

Vector OmegaCoeffs::eval(const Vector& x) const {
  if (has_general()) return offset + general * x;
  if (shared.nonZeros() == 0) return offset;
  return offset.array() + shared.dot(x);
}

Vector OmegaCoeffs::jacobian_t(const Vector& w) const {
  if (has_general()) return general.transpose() * w;
  Vector out = Vector::Zero(shared.size());
  const double total = w.sum();
  for (SparseVector::InnerIterator it(shared); it; ++it) {
    out[it.index()] = it.value() * total;
  }
  return out;
}

ConstraintEval reformulate(const AffineGaussianConstraint& c,
                           const GaussianSpec& spec, const Vector& x) {
  const Vector coeff = c.omega.eval(x);
  const double kappa = inv_norm_cdf(1.0 - c.eps);
  const double var = (spec.variance.array() * coeff.array().square()).sum();
  const double std_dev = std::sqrt(std::max(var, 0.0));

  ConstraintEval out;
  out.value = c.det_lin.dot(x) + c.det_const + spec.mean.dot(coeff) +
              kappa * std_dev - c.bound;

  out.gradient = Vector(c.det_lin) + c.omega.jacobian_t(spec.mean);
  if (std_dev > 0.0) {
    const Vector w = spec.variance.cwiseProduct(coeff);
    out.gradient += (kappa / std_dev) * c.omega.jacobian_t(w);
  }
  return out;
}

SocCut soc_cut(const AffineGaussianConstraint& c, const GaussianSpec& spec,
               const Vector& x, double tol) {
  const ConstraintEval ev = reformulate(c, spec, x);
  if (!(ev.value > tol)) {
    throw std::logic_error("soc_cut: constraint '" + c.label +
                           "' is not violated at the linearization point (value " +
                           std::to_string(ev.value) + ")");
  }
  SocCut cut;
  cut.coeffs = ev.gradient.sparseView();
  cut.rhs = ev.gradient.dot(x) - ev.value;
  cut.label = c.label;
  return cut;
}

}  // namespace rccopf
