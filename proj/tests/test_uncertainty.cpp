#include <cmath>
#include <random>

#include "doctest.h"
#include "rccopf/uncertainty.hpp"

using namespace rccopf;

namespace {

// No validate() here: the oracles are defined for any box widths, and the
// half-width <= sigma2 rule is an ingestion-time check.
WindUncertainty make_u(Vector sigma2, Vector mu_half, Vector sigma2_half,
                       double gamma_mu, double gamma_sigma) {
  WindUncertainty u;
  u.sigma2 = std::move(sigma2);
  u.mu_half = std::move(mu_half);
  u.sigma2_half = std::move(sigma2_half);
  u.gamma_mu = gamma_mu;
  u.gamma_sigma = gamma_sigma;
  return u;
}

// Brute-force oracle: maximize benefit.t over 0 <= t <= 1, sum t <= budget
// by enumerating vertices of the budget polytope (subsets at 1 plus at most
// one fractional coordinate).
double brute_force_budget(const Vector& benefit, double budget) {
  const int n = static_cast<int>(benefit.size());
  double best = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double used = 0, value = 0;
    for (int b = 0; b < n; ++b) {
      if (mask & (1 << b)) {
        used += 1.0;
        value += benefit[b];
      }
    }
    if (used > budget + 1e-12) continue;
    best = std::max(best, value);
    const double rem = budget - used;
    if (rem > 0) {
      for (int b = 0; b < n; ++b) {
        if (mask & (1 << b)) continue;
        best = std::max(best, value + std::min(rem, 1.0) * benefit[b]);
      }
    }
  }
  return best;
}

double brute_force_mean(const WindUncertainty& u, const Vector& x) {
  Vector benefit = u.mu_half.cwiseProduct(x.cwiseAbs());
  return brute_force_budget(benefit, u.gamma_mu * static_cast<double>(u.size()));
}

double brute_force_variance(const WindUncertainty& u, const Vector& q) {
  Vector benefit = u.sigma2_half.cwiseProduct(q);
  return u.sigma2.dot(q) +
         brute_force_budget(benefit, u.gamma_sigma * static_cast<double>(u.size()));
}

void check_mean_certificate(const WindUncertainty& u, const WorstCaseResult& r) {
  double budget_used = 0;
  for (Index b = 0; b < u.size(); ++b) {
    CHECK(std::abs(r.point[b]) <= u.mu_half[b] + 1e-10);
    if (u.mu_half[b] > 0) budget_used += std::abs(r.point[b]) / u.mu_half[b];
  }
  CHECK(budget_used <= u.gamma_mu * static_cast<double>(u.size()) + 1e-10);
}

}  // namespace

TEST_CASE("worst_case_mean trivial budgets") {
  auto u = make_u(Vector::Ones(3), Vector::Constant(3, 2.0), Vector::Zero(3),
                  0.0, 0.0);
  Vector x(3);
  x << 1.0, -2.0, 0.5;

  SUBCASE("gamma 0 gives the nominal zero mean") {
    const auto r = worst_case_mean(u, x);
    CHECK(r.value == 0.0);
    CHECK(r.point.isZero(0));
  }
  SUBCASE("gamma 1 hits the box corner aligned with x") {
    u.gamma_mu = 1.0;
    const auto r = worst_case_mean(u, x);
    CHECK(r.point[0] == doctest::Approx(2.0));
    CHECK(r.point[1] == doctest::Approx(-2.0));
    CHECK(r.point[2] == doctest::Approx(2.0));
    CHECK(r.value == doctest::Approx(2.0 + 4.0 + 1.0));
  }
}

TEST_CASE("worst_case_mean fractional budget example") {
  // mu_half = (1,2), x = (1,1), budget = 0.5 * 2 = 1 unit: all of it goes to
  // the higher-benefit bus 1.
  auto u = make_u(Vector::Ones(2), Vector(2), Vector::Zero(2), 0.5, 0.0);
  u.mu_half << 1.0, 2.0;
  Vector x = Vector::Ones(2);
  const auto r = worst_case_mean(u, x);
  CHECK(r.point[0] == doctest::Approx(0.0));
  CHECK(r.point[1] == doctest::Approx(2.0));
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("worst_case_variance fractional budget example") {
  auto u = make_u(Vector::Ones(2), Vector::Zero(2), Vector(2), 0.0, 0.5);
  u.sigma2_half << 1.0, 2.0;
  Vector q = Vector::Ones(2);
  const auto r = worst_case_variance(u, q);
  CHECK(r.point[0] == doctest::Approx(1.0));
  CHECK(r.point[1] == doctest::Approx(3.0));
  CHECK(r.value == doctest::Approx(4.0));
}

TEST_CASE("worst_case_variance keeps the nominal at gamma 0") {
  auto u = make_u(Vector::Constant(4, 2.0), Vector::Zero(4),
                  Vector::Constant(4, 1.0), 0.0, 0.0);
  Vector q(4);
  q << 1.0, 2.0, 0.0, 3.0;
  const auto r = worst_case_variance(u, q);
  CHECK(r.value == doctest::Approx(u.sigma2.dot(q)));
}

TEST_CASE("worst_case_scalar_omega extremes") {
  Vector sigma2(2), mu_half(2), sigma2_half(2);
  sigma2 << 4.0, 9.0;
  mu_half << 1.0, 2.0;
  sigma2_half << 3.0, 5.0;

  SUBCASE("gamma 0 is nominal") {
    auto u = make_u(sigma2, mu_half, sigma2_half, 0.0, 0.0);
    const auto s = worst_case_scalar_omega(u);
    CHECK(s.min_total_mean == doctest::Approx(0.0));
    CHECK(s.max_total_variance == doctest::Approx(13.0));
  }
  SUBCASE("gamma 1 is the full box") {
    auto u = make_u(sigma2, mu_half, sigma2_half, 1.0, 1.0);
    const auto s = worst_case_scalar_omega(u);
    CHECK(s.min_total_mean == doctest::Approx(-3.0));
    CHECK(s.max_total_variance == doctest::Approx(13.0 + 8.0));
  }
  SUBCASE("fractional mean budget") {
    auto u = make_u(sigma2, mu_half, sigma2_half, 0.5, 0.0);
    const auto s = worst_case_scalar_omega(u);
    CHECK(s.min_total_mean == doctest::Approx(-2.0));
  }
}

TEST_CASE("oracles match brute-force vertex enumeration") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 500; ++trial) {
    const Index n = 1 + static_cast<Index>(unif(rng) * 6);
    Vector sigma2 = Vector::NullaryExpr(n, [&](Index) { return 0.5 + unif(rng); });
    Vector mu_half = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });
    Vector sigma2_half =
        sigma2.cwiseProduct(Vector::NullaryExpr(n, [&](Index) { return unif(rng); }));
    auto u = make_u(sigma2, mu_half, sigma2_half, unif(rng), unif(rng));

    Vector x = Vector::NullaryExpr(n, [&](Index) { return normal(rng); });
    Vector q = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });

    const auto mean = worst_case_mean(u, x);
    CHECK(mean.value == doctest::Approx(brute_force_mean(u, x)).epsilon(1e-10));
    CHECK(x.dot(mean.point) == doctest::Approx(mean.value).epsilon(1e-12));
    check_mean_certificate(u, mean);

    const auto var = worst_case_variance(u, q);
    CHECK(var.value == doctest::Approx(brute_force_variance(u, q)).epsilon(1e-10));
    double var_budget = 0;
    for (Index b = 0; b < n; ++b) {
      CHECK(var.point[b] >= u.sigma2[b] - 1e-12);
      CHECK(var.point[b] <= u.sigma2[b] + u.sigma2_half[b] + 1e-10);
      if (u.sigma2_half[b] > 0) {
        var_budget += std::abs(var.point[b] - u.sigma2[b]) / u.sigma2_half[b];
      }
    }
    CHECK(var_budget <= u.gamma_sigma * static_cast<double>(n) + 1e-10);
  }
}

TEST_CASE("worst-case values are monotone in the budgets") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  const Index n = 8;
  Vector sigma2 = Vector::NullaryExpr(n, [&](Index) { return 0.5 + unif(rng); });
  Vector mu_half = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });
  Vector sigma2_half = 0.7 * sigma2;
  Vector x = Vector::NullaryExpr(n, [&](Index) { return normal(rng); });
  Vector q = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });

  double prev_mean = -1, prev_var = -1;
  for (double gamma = 0.0; gamma <= 1.0; gamma += 0.1) {
    auto u = make_u(sigma2, mu_half, sigma2_half, gamma, gamma);
    const double mv = worst_case_mean(u, x).value;
    const double vv = worst_case_variance(u, q).value;
    CHECK(mv >= prev_mean - 1e-12);
    CHECK(vv >= prev_var - 1e-12);
    prev_mean = mv;
    prev_var = vv;
  }
}

TEST_CASE("worst_case_mean value is symmetric in x") {
  std::mt19937 rng(5);
  std::normal_distribution<double> normal;
  const Index n = 6;
  auto u = make_u(Vector::Ones(n), Vector::Constant(n, 0.8),
                  Vector::Constant(n, 0.5), 0.4, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    Vector x = Vector::NullaryExpr(n, [&](Index) { return normal(rng); });
    CHECK(worst_case_mean(u, x).value ==
          doctest::Approx(worst_case_mean(u, -x).value).epsilon(1e-12));
  }
}

TEST_CASE("check_robust_feasibility composes the two oracles") {
  // Coefficients c(x*) = (1,1); worst-case mean term 2, Phi^{-1} = 2 and
  // worst-case std 2 give LHS 6 against bound 5: violation 1.
  AffineGaussianConstraint c;
  c.det_lin = SparseVector(2);
  c.omega.offset = Vector::Zero(2);
  c.omega.general = SparseMatrix(2, 2);
  c.omega.general.insert(0, 0) = 1.0;
  c.omega.general.insert(1, 1) = 1.0;
  c.bound = 5.0;
  c.eps = 1.0 - norm_cdf(2.0);

  Vector sigma2(2), mu_half(2), sigma2_half(2);
  sigma2 << 1.0, 1.0;
  mu_half << 1.0, 2.0;
  sigma2_half << 1.0, 2.0;
  auto u = make_u(sigma2, mu_half, sigma2_half, 0.5, 0.5);

  Vector x = Vector::Ones(2);
  const auto check = check_robust_feasibility(c, u, x);
  CHECK_FALSE(check.feasible);
  CHECK(check.violation == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(check.worst.mean.sum() == doctest::Approx(2.0));
  CHECK(check.worst.variance.sum() == doctest::Approx(4.0));

  SUBCASE("gamma 0 matches the nominal reformulation") {
    u.gamma_mu = 0;
    u.gamma_sigma = 0;
    const auto nominal_check = check_robust_feasibility(c, u, x);
    const auto ev = reformulate(c, u.nominal(), x);
    CHECK(nominal_check.violation == doctest::Approx(ev.value).epsilon(1e-12));
  }
  SUBCASE("a huge bound is always feasible") {
    c.bound = 1e9;
    CHECK(check_robust_feasibility(c, u, x).feasible);
  }
}

TEST_CASE("uncertainty validation rejects bad half-widths") {
  Vector sigma2 = Vector::Ones(2);
  CHECK_THROWS_AS(
      make_u(sigma2, Vector::Constant(2, -0.1), Vector::Zero(2), 0.5, 0.5)
          .validate(),
      InvalidInput);
  CHECK_THROWS_AS(
      make_u(sigma2, Vector::Zero(2), Vector::Constant(2, 1.5), 0.5, 0.5)
          .validate(),
      InvalidInput);
  CHECK_THROWS_AS(
      make_u(sigma2, Vector::Zero(2), Vector::Zero(2), 1.5, 0.5).validate(),
      InvalidInput);
  CHECK_NOTHROW(
      make_u(sigma2, Vector::Ones(2), Vector::Constant(2, 0.5), 0.6, 0.6)
          .validate());
}
