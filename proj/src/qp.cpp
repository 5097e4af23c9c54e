#include "rccopf/qp.hpp"

#include <cmath>
#include <limits>

namespace rccopf {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// d = J^T np for a sparse constraint row np.
Vector jt_times(const Matrix& J, const SparseVector& np) {
  Vector d = Vector::Zero(J.cols());
  for (SparseVector::InnerIterator it(np); it; ++it) {
    d.noalias() += it.value() * J.row(it.index()).transpose();
  }
  return d;
}

// Working state of the dual active-set method: J spans the (transformed)
// free subspace in its trailing columns, R is the triangular factor of the
// active constraint normals, u carries the duals with the incoming
// candidate's partial dual parked one slot past the active count.
struct ActiveSetState {
  Matrix J;
  Matrix R;
  std::vector<int> active;  // constraint ids; equalities first
  Vector u;
  int q = 0;
  double r_norm = 1.0;

  explicit ActiveSetState(const Matrix& j0)
      : J(j0),
        R(Matrix::Zero(j0.rows(), j0.cols())),
        u(Vector::Zero(j0.rows() + 1)) {}

  void directions(const Vector& d, Vector& z, Vector& r) const {
    const Index n = J.rows();
    z.noalias() = J.rightCols(n - q) * d.tail(n - q);
    r = q > 0 ? Vector(R.topLeftCorner(q, q)
                           .triangularView<Eigen::Upper>()
                           .solve(d.head(q)))
              : Vector();
  }

  // Rotates the candidate normal into the active factor. Returns false when
  // the normal is linearly dependent on the active set.
  bool add(Vector d) {
    const Index n = J.rows();
    for (Index j = n - 1; j >= q + 1; --j) {
      const double h = std::hypot(d[j - 1], d[j]);
      if (h == 0.0) continue;
      const double c = d[j - 1] / h;
      const double s = d[j] / h;
      d[j - 1] = h;
      d[j] = 0.0;
      const Vector t1 = J.col(j - 1);
      const Vector t2 = J.col(j);
      J.col(j - 1) = c * t1 + s * t2;
      J.col(j) = -s * t1 + c * t2;
    }
    if (std::abs(d[q]) <= 128.0 * kEps * r_norm) return false;
    R.col(q).head(q + 1) = d.head(q + 1);
    ++q;
    r_norm = std::max(r_norm, std::abs(d[q - 1]));
    return true;
  }

  // Drops the active constraint at `position`; the candidate's parked dual
  // slides down with the rest.
  void remove(int position) {
    for (int i = position; i < q - 1; ++i) {
      active[static_cast<size_t>(i)] = active[static_cast<size_t>(i + 1)];
      u[i] = u[i + 1];
      R.col(i) = R.col(i + 1);
    }
    active.pop_back();
    u[q - 1] = u[q];
    u[q] = 0.0;
    R.col(q - 1).setZero();
    --q;

    // Restore triangularity below the removed column.
    for (int j = position; j < q; ++j) {
      const double h = std::hypot(R(j, j), R(j + 1, j));
      if (h == 0.0) continue;
      const double c = R(j, j) / h;
      const double s = R(j + 1, j) / h;
      R(j, j) = h;
      R(j + 1, j) = 0.0;
      for (int k = j + 1; k < q; ++k) {
        const double t1 = R(j, k);
        const double t2 = R(j + 1, k);
        R(j, k) = c * t1 + s * t2;
        R(j + 1, k) = -s * t1 + c * t2;
      }
      const Vector t1 = J.col(j);
      const Vector t2 = J.col(j + 1);
      J.col(j) = c * t1 + s * t2;
      J.col(j + 1) = -s * t1 + c * t2;
    }
  }
};

}  // namespace

void QpSolver::set_objective(const Matrix& G, const Vector& g) {
  n_ = G.rows();
  g_matrix_ = G;
  g_lin_ = g;
  llt_.compute(G);
  if (llt_.info() != Eigen::Success) {
    throw InvalidInput("QP objective matrix is not positive definite");
  }
  j0_ = llt_.matrixL().transpose().solve(Matrix::Identity(n_, n_));
}

void QpSolver::set_equalities(std::vector<SparseVector> rows, Vector rhs) {
  eq_rows_ = std::move(rows);
  eq_rhs_ = std::move(rhs);
}

void QpSolver::set_inequalities(std::vector<SparseVector> rows, Vector rhs) {
  ineq_rows_ = std::move(rows);
  ineq_rhs_.assign(rhs.data(), rhs.data() + rhs.size());
}

void QpSolver::add_inequality(SparseVector row, double rhs) {
  ineq_rows_.push_back(std::move(row));
  ineq_rhs_.push_back(rhs);
}

QpResult QpSolver::solve() const {
  QpResult result;
  if (n_ == 0) throw InvalidInput("QP solve called before set_objective");

  const int p = static_cast<int>(eq_rows_.size());
  const int m = static_cast<int>(ineq_rows_.size());

  ActiveSetState st(j0_);
  Vector x = llt_.solve(-g_lin_);
  Vector z(n_), r;

  // Equalities join the active set unconditionally. A dependent but
  // consistent row is redundant and skipped; an inconsistent one makes the
  // problem infeasible.
  for (int k = 0; k < p; ++k) {
    const SparseVector& np = eq_rows_[static_cast<size_t>(k)];
    const Vector d = jt_times(st.J, np);
    st.directions(d, z, r);
    const double slack = np.dot(x) - eq_rhs_[k];
    const double ztnp = z.dot(Vector(np));
    if (z.norm() <= 1e-12 * (1.0 + x.norm()) ||
        std::abs(ztnp) <= 128.0 * kEps * st.r_norm) {
      if (std::abs(slack) > 1e-8 * (1.0 + std::abs(eq_rhs_[k]))) {
        result.status = QpStatus::Infeasible;
        return result;
      }
      continue;
    }
    const double step = -slack / ztnp;
    x += step * z;
    if (st.q > 0) st.u.head(st.q) -= step * r;
    st.u[st.q] = step;
    st.active.push_back(k);
    if (!st.add(d)) {
      result.status = QpStatus::NumericalError;
      return result;
    }
  }

  std::vector<char> in_active(static_cast<size_t>(m), 0);
  const int max_iters = 200 + 16 * (m + p);
  int iters = 0;
  int ip = -1;
  double s_ip = 0;

  auto slack_of = [&](int j) {
    return ineq_rows_[static_cast<size_t>(j)].dot(x) -
           ineq_rhs_[static_cast<size_t>(j)];
  };
  auto feas_tol = [&](int j) {
    return feas_tol_ * (1.0 + std::abs(ineq_rhs_[static_cast<size_t>(j)]));
  };

  while (true) {
    if (++iters > max_iters) {
      result.status = QpStatus::NumericalError;
      return result;
    }

    if (ip < 0) {
      double worst = 0;
      for (int j = 0; j < m; ++j) {
        if (in_active[static_cast<size_t>(j)]) continue;
        const double s = slack_of(j);
        if (s < -feas_tol(j) && s < worst) {
          worst = s;
          ip = j;
        }
      }
      if (ip < 0) break;  // everything satisfied: optimal
      s_ip = worst;
      st.u[st.q] = 0;
    }

    const SparseVector& np = ineq_rows_[static_cast<size_t>(ip)];
    const Vector d = jt_times(st.J, np);
    st.directions(d, z, r);

    // Largest dual-feasible partial step over active inequalities.
    double t1 = kInf;
    int drop_pos = -1;
    for (int k = 0; k < st.q; ++k) {
      if (st.active[static_cast<size_t>(k)] < p) continue;
      if (r[k] > 0) {
        const double ratio = st.u[k] / r[k];
        if (ratio < t1) {
          t1 = ratio;
          drop_pos = k;
        }
      }
    }

    const bool z_zero = z.norm() <= 1e-12 * (1.0 + x.norm());
    const double ztnp = z_zero ? 0.0 : z.dot(Vector(np));
    const double t2 = (z_zero || std::abs(ztnp) <= 128.0 * kEps * st.r_norm)
                          ? kInf
                          : -s_ip / ztnp;
    const double t = std::min(t1, t2);

    if (t >= kInf) {
      result.status = QpStatus::Infeasible;  // dual unbounded
      return result;
    }

    if (t2 >= kInf) {
      // Dual-only step: drop the blocking constraint, keep the candidate.
      if (st.q > 0) st.u.head(st.q) -= t * r;
      st.u[st.q] += t;
      in_active[static_cast<size_t>(
          st.active[static_cast<size_t>(drop_pos)] - p)] = 0;
      st.remove(drop_pos);
      continue;
    }

    x += t * z;
    if (st.q > 0) st.u.head(st.q) -= t * r;
    st.u[st.q] += t;

    if (t == t2) {
      st.active.push_back(p + ip);
      if (!st.add(d)) {
        result.status = QpStatus::NumericalError;
        return result;
      }
      in_active[static_cast<size_t>(ip)] = 1;
      ip = -1;
    } else {
      in_active[static_cast<size_t>(
          st.active[static_cast<size_t>(drop_pos)] - p)] = 0;
      st.remove(drop_pos);
      s_ip = slack_of(ip);
      if (s_ip >= -feas_tol(ip)) ip = -1;
    }
  }

  result.status = QpStatus::Optimal;
  result.x = x;
  result.objective = 0.5 * x.dot(g_matrix_ * x) + g_lin_.dot(x);
  result.active_set_iterations = iters;
  for (int k = 0; k < st.q; ++k) {
    const int id = st.active[static_cast<size_t>(k)];
    if (id >= p) result.active_inequalities.push_back(id - p);
  }
  return result;
}

}  // namespace rccopf
