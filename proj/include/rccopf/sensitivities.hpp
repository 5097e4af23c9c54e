#pragma once

#include <Eigen/SparseCholesky>

#include <unordered_map>
#include <vector>

#include "rccopf/grid.hpp"
#include "rccopf/types.hpp"

namespace rccopf {

/// Bus admittance matrix: B_mn = -beta_mn on lines, diagonal = sum of
/// incident susceptances. Symmetric with zero row sums. Parallel lines must
/// have been merged beforehand (normalize()).
SparseMatrix build_admittance(const GridCase& grid);

/// Reduced admittance factorization and sensitivity rows for one case.
///
/// Holds a sparse LDLT of B-hat (B with the reference row and column
/// removed), reused across every solve of a study. Rows of B-hat^{-1} are
/// precomputed for the buses passed at construction (typically the endpoints
/// of monitored lines); rows for other buses are solved on demand without
/// mutating the object. Immutable after construction and safe to share
/// across threads.
class NetworkSensitivities {
 public:
  /// Factors the reduced admittance of `grid`. `pi_buses` lists the buses
  /// whose sensitivity rows are cached eagerly. Throws InvalidInput for a
  /// disconnected network, naming an isolated component.
  NetworkSensitivities(const GridCase& grid, const std::vector<int>& pi_buses);

  Index bus_count() const { return n_; }
  int reference_bus() const { return reference_; }
  const SparseMatrix& admittance() const { return admittance_; }

  /// b-th row of B-hat^{-1}, embedded as a full |B|-vector whose reference
  /// entry is zero. pi_row(reference) is the zero vector.
  Vector pi_row(int bus) const;

  /// Solves B theta = injections with theta_ref fixed to zero. `injections`
  /// is a full per-unit bus vector; its reference entry is ignored (the
  /// reference bus absorbs any residual).
  Vector solve_theta(const Vector& injections_pu) const;

  /// Per-line flows beta_mn (theta_m - theta_n), per-unit.
  Vector line_flows(const Vector& theta) const;

 private:
  Index n_ = 0;
  int reference_ = 0;
  SparseMatrix admittance_;
  Eigen::SimplicialLDLT<SparseMatrix> reduced_;
  std::unordered_map<int, Vector> pi_cache_;
  const GridCase* grid_ = nullptr;

  Vector solve_reduced(const Vector& rhs_full) const;
};

struct PowerFlowResult {
  Vector theta;        // radians; zero at the reference bus
  Vector flows_mw;     // per line
  double residual_mw;  // net imbalance absorbed by the reference bus
  bool balanced;       // |residual| within 1e-6 x total load
};

/// DC power flow for explicit per-bus injections in MW (generation + wind
/// - demand, signed). Any imbalance lands on the reference bus and is
/// reported in the result rather than hidden.
PowerFlowResult solve_dc_power_flow(const GridCase& grid,
                                    const NetworkSensitivities& sens,
                                    const Vector& injections_mw);

/// Adjusted phase angles under a wind deviation: theta_b - Omega delta_b +
/// pi_b . omega, the closed form of the perturbed power-flow solution. All
/// quantities per-unit; `omega_pu` has one entry per wind farm (ordered as
/// grid.wind_farms).
Vector affine_theta_response(const GridCase& grid,
                             const NetworkSensitivities& sens,
                             const Vector& theta, const Vector& delta,
                             const Vector& omega_pu);

/// Solves the auxiliary system B-hat delta = per-bus participation, with
/// delta_ref = 0. `alpha_by_bus_` is the full bus vector of summed
/// participation factors.
Vector solve_delta(const NetworkSensitivities& sens, const Vector& alpha_by_bus);

}  // namespace rccopf
