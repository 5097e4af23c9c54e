#include "rccopf/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rccopf {

void WindUncertainty::validate() const {
  const Index n = sigma2.size();
  if (mu_half.size() != n || sigma2_half.size() != n) {
    throw InvalidInput("wind uncertainty: mismatched vector sizes");
  }
  for (Index b = 0; b < n; ++b) {
    if (sigma2[b] < 0) {
      throw InvalidInput("wind uncertainty: negative variance at wind bus " +
                         std::to_string(b));
    }
    if (mu_half[b] < 0) {
      throw InvalidInput("wind uncertainty: negative mean half-width at wind bus " +
                         std::to_string(b));
    }
    if (sigma2_half[b] < 0 || sigma2_half[b] > sigma2[b]) {
      throw InvalidInput(
          "wind uncertainty: variance half-width at wind bus " + std::to_string(b) +
          " must lie in [0, sigma2] so that every covariance in the set is valid");
    }
  }
  if (gamma_mu < 0 || gamma_mu > 1 || gamma_sigma < 0 || gamma_sigma > 1) {
    throw InvalidInput("wind uncertainty: budgets must lie in [0, 1]");
  }
}

namespace {

// Shared greedy for both budget polytopes: maximize sum_b benefit_b * t_b
// over 0 <= t <= 1, sum t <= budget. Returns the normalized deviations t.
// The budget is the exact real value; the fractional remainder goes to the
// next-best bus. Ties break on bus index (stable sort).
Vector greedy_budget(const Vector& benefit, double budget) {
  const Index n = benefit.size();
  Vector t = Vector::Zero(n);
  if (budget <= 0) return t;

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return benefit[a] > benefit[b]; });

  double remaining = std::min(budget, static_cast<double>(n));
  for (Index idx : order) {
    if (remaining <= 0) break;
    const double take = std::min(1.0, remaining);
    t[idx] = take;
    remaining -= take;
  }
  return t;
}

}  // namespace

WorstCaseResult worst_case_mean(const WindUncertainty& u, const Vector& x) {
  const Index n = u.size();
  Vector benefit(n);
  for (Index b = 0; b < n; ++b) benefit[b] = u.mu_half[b] * std::abs(x[b]);

  const Vector t = greedy_budget(benefit, u.gamma_mu * static_cast<double>(n));

  WorstCaseResult out;
  out.point = Vector::Zero(n);
  for (Index b = 0; b < n; ++b) {
    const double sign = x[b] >= 0 ? 1.0 : -1.0;
    out.point[b] = sign * t[b] * u.mu_half[b];
  }
  out.value = x.dot(out.point);
  return out;
}

WorstCaseResult worst_case_variance(const WindUncertainty& u, const Vector& q) {
  const Index n = u.size();
  Vector benefit(n);
  for (Index b = 0; b < n; ++b) benefit[b] = u.sigma2_half[b] * q[b];

  const Vector t = greedy_budget(benefit, u.gamma_sigma * static_cast<double>(n));

  WorstCaseResult out;
  out.point = u.sigma2 + t.cwiseProduct(u.sigma2_half);
  out.value = q.dot(out.point);
  return out;
}

ScalarOmegaBounds worst_case_scalar_omega(const WindUncertainty& u) {
  ScalarOmegaBounds out;
  // U_mu is symmetric: the minimizer of the total mean is the negated
  // maximizer of sum mu_b.
  out.min_total_mean = -worst_case_mean(u, Vector::Ones(u.size())).value;
  out.max_total_variance =
      worst_case_variance(u, Vector::Ones(u.size())).value;
  return out;
}

RobustCheck check_robust_feasibility(const AffineGaussianConstraint& c,
                                     const WindUncertainty& u, const Vector& x,
                                     double tol) {
  const Vector coeff = c.omega.eval(x);
  const WorstCaseResult mean = worst_case_mean(u, coeff);
  const WorstCaseResult var =
      worst_case_variance(u, coeff.array().square().matrix());
  const double kappa = inv_norm_cdf(1.0 - c.eps);

  RobustCheck out;
  out.worst = {mean.point, var.point};
  out.violation = c.det_lin.dot(x) + c.det_const + mean.value +
                  kappa * std::sqrt(std::max(var.value, 0.0)) - c.bound;
  out.feasible = out.violation <= tol;
  return out;
}

}  // namespace rccopf
