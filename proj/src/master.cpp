#include "rccopf/master.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rccopf/qp.hpp"
#include "rccopf/simplex.hpp"

namespace rccopf {

MasterProblem lower_to_master(const OpfModel& model, bool force_gen_cuts) {
  MasterProblem p;
  p.obj_quad = model.obj_quad;
  p.obj_lin = model.obj_lin;
  p.obj_const = model.obj_const;
  p.equalities = model.equalities;
  p.inequalities = model.inequalities;
  if (!force_gen_cuts) {
    p.inequalities.insert(p.inequalities.end(), model.resolved_gen_rows.begin(),
                          model.resolved_gen_rows.end());
  }
  return p;
}

namespace {

// Dense dual active-set backend. Zero-curvature directions (linear costs,
// vanishing var(Omega) terms) get a tiny ridge so the Hessian stays positive
// definite; the perturbation is far below solver tolerances.
class QpMaster final : public MasterSolver {
 public:
  Capabilities capabilities() const override { return {true, true, false}; }

  void set_feasibility_tolerance(double tol) override {
    qp_.set_feasibility_tolerance(tol);
  }

  void load(const MasterProblem& problem) override {
    problem_ = problem;
    const Index n = problem.variable_count();
    Vector diag = 2.0 * problem.obj_quad;
    const double scale = std::max(1.0, diag.size() > 0 ? diag.maxCoeff() : 1.0);
    for (Index j = 0; j < n; ++j) diag[j] = std::max(diag[j], 1e-9 * scale);
    qp_.set_objective(Matrix(diag.asDiagonal()), problem.obj_lin);

    std::vector<SparseVector> eq_rows;
    Vector eq_rhs(static_cast<Index>(problem.equalities.size()));
    for (size_t k = 0; k < problem.equalities.size(); ++k) {
      eq_rows.push_back(problem.equalities[k].coeffs);
      eq_rhs[static_cast<Index>(k)] = problem.equalities[k].lo;
    }
    qp_.set_equalities(std::move(eq_rows), eq_rhs);

    std::vector<SparseVector> rows;
    std::vector<double> rhs;
    for (const LinearRow& row : problem.inequalities) append_row(row, rows, rhs);
    Vector rhs_vec = Eigen::Map<const Vector>(rhs.data(), static_cast<Index>(rhs.size()));
    qp_.set_inequalities(std::move(rows), rhs_vec);
  }

  void add_constraint(const LinearRow& cut) override {
    std::vector<SparseVector> rows;
    std::vector<double> rhs;
    append_row(cut, rows, rhs);
    for (size_t k = 0; k < rows.size(); ++k) {
      qp_.add_inequality(std::move(rows[k]), rhs[k]);
    }
  }

  MasterStatus solve() override {
    const QpResult r = qp_.solve();
    if (r.status == QpStatus::Optimal) {
      point_ = r.x;
      objective_ = master_value(r.x);
      return MasterStatus::Optimal;
    }
    return r.status == QpStatus::Infeasible ? MasterStatus::Infeasible
                                            : MasterStatus::Error;
  }

  const Vector& point() const override { return point_; }
  double objective() const override { return objective_; }

 private:
  // lo <= a.x <= hi becomes `a.x >= lo` and `-a.x >= -hi`.
  static void append_row(const LinearRow& row, std::vector<SparseVector>& rows,
                         std::vector<double>& rhs) {
    if (std::isfinite(row.lo)) {
      rows.push_back(row.coeffs);
      rhs.push_back(row.lo);
    }
    if (std::isfinite(row.hi)) {
      rows.push_back(-row.coeffs);
      rhs.push_back(-row.hi);
    }
  }

  double master_value(const Vector& x) const {
    return problem_.obj_quad.dot(x.cwiseProduct(x)) + problem_.obj_lin.dot(x) +
           problem_.obj_const;
  }

  MasterProblem problem_;
  QpSolver qp_;
  Vector point_;
  double objective_ = 0;
};

// Piecewise-linear fallback for LP-only setups: each quadratic variable gets
// an epigraph variable supported by tangents of its cost parabola, sampled
// over the variable's feasible interval.
class PwlLpMaster final : public MasterSolver {
 public:
  explicit PwlLpMaster(int segments) : segments_(std::max(segments, 2)) {}

  Capabilities capabilities() const override { return {false, true, false}; }

  void load(const MasterProblem& problem) override {
    problem_ = problem;
    const Index n = problem.variable_count();

    // Feasible intervals from single-variable rows; tangent placement only.
    Vector lo = Vector::Constant(n, -1.0);
    Vector hi = Vector::Constant(n, 1.0);
    for (const LinearRow& row : problem.inequalities) {
      if (row.coeffs.nonZeros() != 1) continue;
      SparseVector::InnerIterator it(row.coeffs);
      if (it.value() <= 0) continue;
      if (std::isfinite(row.lo)) lo[it.index()] = row.lo / it.value();
      if (std::isfinite(row.hi)) hi[it.index()] = row.hi / it.value();
    }

    quad_vars_.clear();
    for (Index j = 0; j < n; ++j) {
      if (problem.obj_quad[j] > 0) quad_vars_.push_back(j);
    }
    const Index nq = static_cast<Index>(quad_vars_.size());

    lp_ = LpProblem{};
    lp_.objective = Vector::Zero(n + nq);
    lp_.objective.head(n) = problem.obj_lin;
    for (Index k = 0; k < nq; ++k) lp_.objective[n + k] = 1.0;
    lp_.var_lo = Vector::Constant(n + nq, -kInf);
    lp_.var_hi = Vector::Constant(n + nq, kInf);

    auto widen = [](SparseVector v, Index size) {
      SparseVector out(size);
      for (SparseVector::InnerIterator it(v); it; ++it) {
        out.insert(it.index()) = it.value();
      }
      return out;
    };

    std::vector<SparseVector> rows;
    std::vector<double> los, his;
    for (const LinearRow& row : problem.equalities) {
      rows.push_back(widen(row.coeffs, n + nq));
      los.push_back(row.lo);
      his.push_back(row.hi);
    }
    for (const LinearRow& row : problem.inequalities) {
      rows.push_back(widen(row.coeffs, n + nq));
      los.push_back(row.lo);
      his.push_back(row.hi);
    }

    // Tangent rows: t_k >= q (2 x0 x - x0^2) for sample points x0.
    for (Index k = 0; k < nq; ++k) {
      const Index j = quad_vars_[static_cast<size_t>(k)];
      const double q = problem.obj_quad[j];
      const double a = std::min(lo[j], hi[j]);
      const double b = std::max(lo[j], hi[j]);
      for (int s = 0; s < segments_; ++s) {
        const double x0 =
            segments_ == 1 ? a : a + (b - a) * s / (segments_ - 1);
        SparseVector r(n + nq);
        r.insert(j) = -2.0 * q * x0;
        r.insert(n + k) = 1.0;
        rows.push_back(std::move(r));
        los.push_back(-q * x0 * x0);
        his.push_back(kInf);
      }
    }

    lp_.rows = std::move(rows);
    lp_.row_lo = Eigen::Map<const Vector>(los.data(), static_cast<Index>(los.size()));
    lp_.row_hi = Eigen::Map<const Vector>(his.data(), static_cast<Index>(his.size()));
  }

  void add_constraint(const LinearRow& cut) override {
    const Index total = lp_.objective.size();
    SparseVector wide(total);
    for (SparseVector::InnerIterator it(cut.coeffs); it; ++it) {
      wide.insert(it.index()) = it.value();
    }
    lp_.rows.push_back(std::move(wide));
    Vector lo2(lp_.row_lo.size() + 1), hi2(lp_.row_hi.size() + 1);
    lo2 << lp_.row_lo, cut.lo;
    hi2 << lp_.row_hi, cut.hi;
    lp_.row_lo = std::move(lo2);
    lp_.row_hi = std::move(hi2);
  }

  MasterStatus solve() override {
    const LpResult r = solve_lp(lp_);
    switch (r.status) {
      case LpStatus::Optimal: {
        const Index n = problem_.variable_count();
        point_ = r.x.head(n);
        objective_ = problem_.obj_quad.dot(point_.cwiseProduct(point_)) +
                     problem_.obj_lin.dot(point_) + problem_.obj_const;
        return MasterStatus::Optimal;
      }
      case LpStatus::Infeasible:
        return MasterStatus::Infeasible;
      default:
        return MasterStatus::Error;
    }
  }

  const Vector& point() const override { return point_; }
  double objective() const override { return objective_; }

 private:
  int segments_;
  MasterProblem problem_;
  LpProblem lp_;
  std::vector<Index> quad_vars_;
  Vector point_;
  double objective_ = 0;
};

std::map<std::string, std::function<std::unique_ptr<MasterSolver>(int)>>&
registry() {
  static std::map<std::string, std::function<std::unique_ptr<MasterSolver>(int)>>
      map{
          {"qp", [](int) { return std::make_unique<QpMaster>(); }},
          {"lp",
           [](int segments) { return std::make_unique<PwlLpMaster>(segments); }},
      };
  return map;
}

}  // namespace

std::unique_ptr<MasterSolver> make_master_solver(const std::string& backend,
                                                 int pwl_segments) {
  const auto it = registry().find(backend);
  if (it == registry().end()) {
    throw InvalidInput("unknown master backend '" + backend + "'");
  }
  return it->second(pwl_segments);
}

std::vector<std::string> master_backends() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

void register_master_backend(
    const std::string& name,
    std::function<std::unique_ptr<MasterSolver>(int)> factory) {
  registry()[name] = std::move(factory);
}

}  // namespace rccopf
