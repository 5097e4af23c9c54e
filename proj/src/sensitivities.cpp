#include "rccopf/sensitivities.hpp"

#include <vector>

namespace rccopf {

SparseMatrix build_admittance(const GridCase& grid) {
  const Index n = grid.bus_count();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(grid.lines.size() * 4);
  for (const Line& l : grid.lines) {
    entries.emplace_back(l.from, l.to, -l.susceptance);
    entries.emplace_back(l.to, l.from, -l.susceptance);
    entries.emplace_back(l.from, l.from, l.susceptance);
    entries.emplace_back(l.to, l.to, l.susceptance);
  }
  SparseMatrix B(n, n);
  B.setFromTriplets(entries.begin(), entries.end());
  return B;
}

namespace {

SparseMatrix drop_reference(const SparseMatrix& B, int reference) {
  const Index n = B.rows();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(B.nonZeros()));
  for (Index col = 0; col < n; ++col) {
    for (SparseMatrix::InnerIterator it(B, col); it; ++it) {
      if (it.row() == reference || it.col() == reference) continue;
      const Index r = it.row() < reference ? it.row() : it.row() - 1;
      const Index c = it.col() < reference ? it.col() : it.col() - 1;
      entries.emplace_back(r, c, it.value());
    }
  }
  SparseMatrix reduced(n - 1, n - 1);
  reduced.setFromTriplets(entries.begin(), entries.end());
  return reduced;
}

}  // namespace

NetworkSensitivities::NetworkSensitivities(const GridCase& grid,
                                           const std::vector<int>& pi_buses)
    : n_(grid.bus_count()), reference_(grid.reference_bus()), grid_(&grid) {
  const auto components = connected_components(n_, grid.lines);
  if (components.size() > 1) {
    const auto& isolated =
        components[0].front() == reference_ ? components[1] : components[0];
    throw InvalidInput("reduced admittance is singular: component containing bus " +
                       std::to_string(isolated.front()) + " (" +
                       std::to_string(isolated.size()) +
                       " buses) is isolated from the reference bus");
  }

  admittance_ = build_admittance(grid);
  if (n_ > 1) {
    reduced_.compute(drop_reference(admittance_, reference_));
    if (reduced_.info() != Eigen::Success) {
      throw InvalidInput("reduced admittance factorization failed");
    }
  }

  for (int bus : pi_buses) {
    if (!pi_cache_.count(bus)) pi_cache_.emplace(bus, pi_row(bus));
  }
}

Vector NetworkSensitivities::solve_reduced(const Vector& rhs_full) const {
  Vector out = Vector::Zero(n_);
  if (n_ == 1) return out;
  Vector rhs(n_ - 1);
  for (Index b = 0; b < n_; ++b) {
    if (b == reference_) continue;
    rhs[b < reference_ ? b : b - 1] = rhs_full[b];
  }
  const Vector reduced = reduced_.solve(rhs);
  for (Index b = 0; b < n_; ++b) {
    if (b == reference_) continue;
    out[b] = reduced[b < reference_ ? b : b - 1];
  }
  return out;
}

Vector NetworkSensitivities::pi_row(int bus) const {
  if (bus == reference_) return Vector::Zero(n_);  // reference does not respond
  const auto it = pi_cache_.find(bus);
  if (it != pi_cache_.end()) return it->second;
  Vector unit = Vector::Zero(n_);
  unit[bus] = 1.0;
  // B-hat is symmetric, so the row equals the column solve.
  return solve_reduced(unit);
}

Vector NetworkSensitivities::solve_theta(const Vector& injections_pu) const {
  return solve_reduced(injections_pu);
}

Vector NetworkSensitivities::line_flows(const Vector& theta) const {
  const auto& lines = grid_->lines;
  Vector flows(static_cast<Index>(lines.size()));
  for (size_t i = 0; i < lines.size(); ++i) {
    const Line& l = lines[i];
    flows[static_cast<Index>(i)] = l.susceptance * (theta[l.from] - theta[l.to]);
  }
  return flows;
}

PowerFlowResult solve_dc_power_flow(const GridCase& grid,
                                    const NetworkSensitivities& sens,
                                    const Vector& injections_mw) {
  if (injections_mw.size() != grid.bus_count()) {
    throw InvalidInput("injection vector size does not match bus count");
  }
  PowerFlowResult out;
  out.residual_mw = injections_mw.sum();
  const double tol = 1e-6 * std::max(1.0, grid.total_demand_mw());
  out.balanced = std::abs(out.residual_mw) <= tol;

  out.theta = sens.solve_theta(injections_mw / grid.base_mva);
  out.flows_mw = sens.line_flows(out.theta) * grid.base_mva;
  return out;
}

Vector affine_theta_response(const GridCase& grid,
                             const NetworkSensitivities& sens,
                             const Vector& theta, const Vector& delta,
                             const Vector& omega_pu) {
  if (omega_pu.size() != static_cast<Index>(grid.wind_farms.size())) {
    throw InvalidInput("omega vector size does not match wind farm count");
  }
  // Scatter omega onto buses; the reference entry is dropped by the reduced
  // solve, matching the closed form in which pi_ref = 0.
  Vector omega_by_bus = Vector::Zero(grid.bus_count());
  for (size_t w = 0; w < grid.wind_farms.size(); ++w) {
    omega_by_bus[grid.wind_farms[w].bus] += omega_pu[static_cast<Index>(w)];
  }
  const double omega_total = omega_pu.sum();
  return theta - omega_total * delta + sens.solve_theta(omega_by_bus);
}

Vector solve_delta(const NetworkSensitivities& sens, const Vector& alpha_by_bus) {
  return sens.solve_theta(alpha_by_bus);
}

}  // namespace rccopf
