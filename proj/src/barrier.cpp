#include "rccopf/barrier.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace rccopf {

namespace {

// Smooth convex constraint g(x) <= 0 with dense derivatives.
struct Smooth {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

Smooth linear_constraint(const Vector& a, double rhs) {
  // a.x <= rhs
  const Index n = a.size();
  return {
      [a, rhs](const Vector& x) { return a.dot(x) - rhs; },
      [a](const Vector&) { return a; },
      [n](const Vector&) { return Matrix::Zero(n, n); },
  };
}

// Conic reformulation of one chance constraint:
//   a.x + a0 + mu.c(x) + kappa sqrt(sum_b var_b c_b(x)^2 + tau^2) <= bound.
// tau keeps the sqrt differentiable at the degenerate point; it is far below
// every solve tolerance.
Smooth soc_constraint(const AffineGaussianConstraint& c,
                      const GaussianSpec& spec) {
  const double kappa = inv_norm_cdf(1.0 - c.eps);
  const double tau2 = 1e-24;
  const Vector a = Vector(c.det_lin);
  // Dense omega Jacobian: toy-sized models only take this path.
  Matrix J;
  if (c.omega.has_general()) {
    J = Matrix(c.omega.general);
  } else {
    J = Vector::Ones(c.omega.wind_count()) * Vector(c.omega.shared).transpose();
  }
  const Vector offset = c.omega.offset;
  const Vector mean = spec.mean;
  const Vector var = spec.variance;
  const double a0 = c.det_const;
  const double bound = c.bound;

  auto coeffs = [J, offset](const Vector& x) -> Vector { return offset + J * x; };
  auto phi = [var, tau2](const Vector& cv) {
    return std::sqrt((var.array() * cv.array().square()).sum() + tau2);
  };

  return {
      [=](const Vector& x) {
        const Vector cv = coeffs(x);
        return a.dot(x) + a0 + mean.dot(cv) + kappa * phi(cv) - bound;
      },
      [=](const Vector& x) -> Vector {
        const Vector cv = coeffs(x);
        const double f = phi(cv);
        return a + J.transpose() * mean +
               (kappa / f) * (J.transpose() * var.cwiseProduct(cv));
      },
      [=](const Vector& x) -> Matrix {
        const Vector cv = coeffs(x);
        const double f = phi(cv);
        const Vector w = J.transpose() * var.cwiseProduct(cv);
        const Matrix jvj = J.transpose() * var.asDiagonal() * J;
        return (kappa / f) * jvj - (kappa / (f * f * f)) * (w * w.transpose());
      },
  };
}

// Reduced-space damped Newton on  t f(x) - sum log(-g_i(x))  over the
// equality manifold x = x0 + Z z. Every iterate satisfies the equalities by
// construction, and the reduced Hessian is positive semidefinite.
struct NewtonResult {
  Vector x;
  int steps = 0;
  bool converged = false;
};

NewtonResult centering(const Vector& quad, const Vector& lin, double t,
                       const Matrix& Z, const std::vector<Smooth>& cons,
                       Vector x, int max_steps,
                       const std::function<bool(const Vector&)>& early_stop = {}) {
  const Index nz = Z.cols();
  NewtonResult out;

  auto barrier_value = [&](const Vector& y, bool* interior) {
    double val = t * (quad.dot(y.cwiseProduct(y)) + lin.dot(y));
    *interior = true;
    for (const Smooth& s : cons) {
      const double g = s.value(y);
      if (g >= 0) {
        *interior = false;
        return kInf;
      }
      val -= std::log(-g);
    }
    return val;
  };

  for (int step = 0; step < max_steps; ++step) {
    if (early_stop && early_stop(x)) {
      out.converged = true;
      break;
    }
    Vector grad = t * (2.0 * quad.cwiseProduct(x) + lin);
    Matrix hess = Matrix::Zero(x.size(), x.size());
    hess.diagonal() = 2.0 * t * quad;
    for (const Smooth& s : cons) {
      const double g = s.value(x);
      const Vector sg = s.gradient(x);
      grad += sg / (-g);
      hess += (sg * sg.transpose()) / (g * g) + s.hessian(x) / (-g);
    }

    const Vector gz = Z.transpose() * grad;
    Matrix hz = Z.transpose() * hess * Z;
    hz.diagonal().array() += 1e-12 * (1.0 + hz.trace() / static_cast<double>(nz));
    const Vector dz = hz.ldlt().solve(-gz);

    const double decrement = -gz.dot(dz);
    out.steps = step + 1;
    if (!(decrement > 0) || decrement * 0.5 < 1e-13 * (1.0 + std::abs(t))) break;

    bool interior = false;
    const double f0 = barrier_value(x, &interior);
    const Vector dx = Z * dz;
    double ls = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      bool ok_point = false;
      const double f1 = barrier_value(x + ls * dx, &ok_point);
      if (ok_point && f1 <= f0 - 1e-4 * ls * decrement) {
        accepted = true;
        break;
      }
      ls *= 0.5;
    }
    if (!accepted) {  // cannot improve further at this conditioning
      out.converged = true;
      break;
    }
    x += ls * dx;
  }
  out.x = x;
  return out;
}

// Orthonormal nullspace basis of E (n x (n - rank)).
Matrix nullspace_basis(const Matrix& E, Index n) {
  if (E.rows() == 0) return Matrix::Identity(n, n);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(E);
  const Index rank = cod.rank();
  // Householder Q of E^T: trailing columns span the nullspace.
  const Eigen::HouseholderQR<Matrix> qr(E.transpose());
  const Matrix q = qr.householderQ();
  return q.rightCols(n - rank);
}

}  // namespace

BarrierOutcome solve_socp_direct(const OpfModel& model, const BarrierConfig& config) {
  if (model.mode != OpfMode::NominalCc) {
    throw InvalidInput(
        "direct conic solve requires the nominal CC model: the robust "
        "counterpart has no compact deterministic reformulation");
  }

  const Index n = model.layout.n_vars;
  BarrierOutcome out;

  // Equality matrix and right-hand side.
  const Index p = static_cast<Index>(model.equalities.size());
  Matrix E = Matrix::Zero(p, n);
  Vector e(p);
  for (Index k = 0; k < p; ++k) {
    E.row(k) = Vector(model.equalities[static_cast<size_t>(k)].coeffs);
    e[k] = model.equalities[static_cast<size_t>(k)].lo;
  }

  // Inequalities: linear rows (bounds, forecast limits, resolved generator
  // rows) plus the conic line constraints.
  std::vector<Smooth> cons;
  auto add_linear = [&](const LinearRow& row) {
    const Vector a = Vector(row.coeffs);
    if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
      if ((std::isfinite(row.hi) && 0.0 > row.hi) ||
          (std::isfinite(row.lo) && 0.0 < row.lo)) {
        throw InvalidInput("constant row '" + row.label + "' is infeasible");
      }
      return;
    }
    if (std::isfinite(row.hi)) cons.push_back(linear_constraint(a, row.hi));
    if (std::isfinite(row.lo)) cons.push_back(linear_constraint(-a, -row.lo));
  };
  for (const LinearRow& row : model.inequalities) add_linear(row);
  for (const LinearRow& row : model.resolved_gen_rows) add_linear(row);
  for (const AffineGaussianConstraint& c : model.line_chance) {
    cons.push_back(soc_constraint(c, model.nominal_pu));
  }
  const double m = static_cast<double>(cons.size());

  // Short centering bursts with unconditional growth of the barrier
  // parameter: exact centers are unnecessary for path following and the
  // decrement can stall near its conditioning floor.
  constexpr int kBurst = 30;
  constexpr double kRelax = 3e-8;

  // The central path needs a strict interior; optima pinched between
  // constraints leave none to work with. The path therefore runs on a
  // microscopically relaxed copy and the exact-KKT polish below removes the
  // relaxation again.
  std::vector<Smooth> relaxed;
  for (const Smooth& s : cons) {
    const Smooth* sp = &s;
    relaxed.push_back({
        [sp](const Vector& y) { return sp->value(y) - kRelax; },
        sp->gradient,
        sp->hessian,
    });
  }

  // Feasible start for the equalities (minimum norm) and the nullspace basis.
  Vector x = p > 0 ? Vector(E.completeOrthogonalDecomposition().solve(e))
                   : Vector::Zero(n);
  const Matrix Z = nullspace_basis(E, n);

  auto max_violation = [&](const Vector& y) {
    double worst = -kInf;
    for (const Smooth& s : relaxed) worst = std::max(worst, s.value(y));
    return worst;
  };

  // Phase I: minimize s over { g_i(x) - s <= 0 } on the manifold until s < 0.
  if (max_violation(x) >= -1e-9) {
    const Index np = n + 1;
    Matrix Z1 = Matrix::Zero(np, Z.cols() + 1);
    Z1.topLeftCorner(n, Z.cols()) = Z;
    Z1(n, Z.cols()) = 1.0;
    std::vector<Smooth> cons1;
    for (const Smooth& s : relaxed) {
      const Smooth* sp = &s;
      cons1.push_back({
          [sp, n](const Vector& y) { return sp->value(y.head(n)) - y[n]; },
          [sp, n, np](const Vector& y) {
            Vector g = Vector::Zero(np);
            g.head(n) = sp->gradient(y.head(n));
            g[n] = -1.0;
            return g;
          },
          [sp, n, np](const Vector& y) {
            Matrix h = Matrix::Zero(np, np);
            h.topLeftCorner(n, n) = sp->hessian(y.head(n));
            return h;
          },
      });
    }
    Vector x1(np);
    x1.head(n) = x;
    x1[n] = max_violation(x) + 1.0;
    Vector quad1 = Vector::Zero(np);
    Vector lin1 = Vector::Zero(np);
    lin1[n] = 1.0;

    double t = 1.0;
    int budget = config.max_newton;
    const auto found_interior = [n](const Vector& y) { return y[n] < -1e-7; };
    while (budget > 0) {
      const NewtonResult nr = centering(quad1, lin1, t, Z1, cons1, x1,
                                        std::min(budget, kBurst), found_interior);
      budget -= nr.steps;
      out.newton_steps += nr.steps;
      x1 = nr.x;
      if (x1[n] < -1e-9) break;  // strictly feasible point found
      if (m / t < 1e-10) break;  // cannot push below zero
      t *= config.t_growth;
    }
    if (x1[n] >= -1e-10) {
      out.feasible = false;
      return out;
    }
    x = x1.head(n);
  }

  // Phase II: follow the central path on the true objective.
  const double obj_scale = std::abs(master_objective(model, x)) + 1.0;
  double t = std::max(1.0, m / obj_scale);
  int budget = config.max_newton;
  double final_t = t;
  while (budget > 0) {
    const NewtonResult nr = centering(model.obj_quad, model.obj_lin, t, Z,
                                      relaxed, x, std::min(budget, kBurst));
    budget -= nr.steps;
    out.newton_steps += nr.steps;
    x = nr.x;
    final_t = t;
    if (m / t <= config.gap_tol * (std::abs(master_objective(model, x)) + 1.0)) {
      break;
    }
    t *= config.t_growth;
  }

  // Active-set polish: Newton on the KKT system of the original problem with
  // the activity pattern identified at the barrier point and multipliers
  // seeded by the interior-point estimate 1 / (t (-g)). A polish step that
  // leaves the feasible set or jumps too far is discarded.
  {
    std::vector<size_t> act;
    for (size_t i = 0; i < cons.size(); ++i) {
      if (cons[i].value(x) > -1e-5) act.push_back(i);
    }
    const Index na = static_cast<Index>(act.size());
    Vector x_polish = x;
    Vector lambda(na);
    for (Index a = 0; a < na; ++a) {
      lambda[a] = 1.0 / (final_t *
                         std::max(-cons[act[static_cast<size_t>(a)]].value(x), 1e-300));
    }
    Vector nu = Vector::Zero(p);
    bool polish_ok = true;
    for (int round = 0; round < 5 && polish_ok; ++round) {
      Matrix K = Matrix::Zero(n + na + p, n + na + p);
      Vector r(n + na + p);
      Matrix hess = Matrix::Zero(n, n);
      hess.diagonal() = 2.0 * model.obj_quad;
      Vector dual = 2.0 * model.obj_quad.cwiseProduct(x_polish) + model.obj_lin;
      for (Index a = 0; a < na; ++a) {
        const Smooth& s = cons[act[static_cast<size_t>(a)]];
        const Vector sg = s.gradient(x_polish);
        hess += lambda[a] * s.hessian(x_polish);
        dual += lambda[a] * sg;
        K.block(0, n + a, n, 1) = sg;
        K.block(n + a, 0, 1, n) = sg.transpose();
        r[n + a] = -s.value(x_polish);
      }
      if (p > 0) {
        K.block(0, n + na, n, p) = E.transpose();
        K.block(n + na, 0, p, n) = E;
        dual += E.transpose() * nu;
        r.tail(p) = e - E * x_polish;
      }
      K.topLeftCorner(n, n) = hess;
      r.head(n) = -dual;
      const Vector step = K.completeOrthogonalDecomposition().solve(r);
      if (!step.allFinite() ||
          step.head(n).norm() > 1e-2 * (1.0 + x_polish.norm())) {
        polish_ok = false;
        break;
      }
      x_polish += step.head(n);
      lambda += step.segment(n, na);
      if (p > 0) nu += step.tail(p);
    }
    if (polish_ok) {
      for (const Smooth& s : cons) {
        if (s.value(x_polish) > 1e-9) polish_ok = false;
      }
      if (p > 0 && (E * x_polish - e).cwiseAbs().maxCoeff() > 1e-9) polish_ok = false;
      const double before = master_objective(model, x);
      const double after = master_objective(model, x_polish);
      if (after > before + 1e-9 * (1.0 + std::abs(before)) ||
          after < before - 1e-3 * (1.0 + std::abs(before))) {
        polish_ok = false;
      }
    }
    if (polish_ok) x = x_polish;
  }

  out.feasible = true;
  out.solution = recover_solution(model, x);
  return out;
}

}  // namespace rccopf
