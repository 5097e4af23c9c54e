#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rccopf/cutting_plane.hpp"
#include "rccopf/grid.hpp"
#include "rccopf/model.hpp"

namespace rccopf {

/// Hour-ahead inputs of one dispatch interval: forecasts, commitment and the
/// exogenous outputs of fixed-dispatch units.
struct HourScenario {
  int hour = 0;
  Vector demand_mw;         // per bus; empty keeps the case values
  Vector wind_forecast_mw;  // per wind farm; empty keeps the case values
  std::vector<char> commitment;  // per generator; empty = all in service
  Vector fixed_output_mw;   // per generator, for non-dispatchable units; empty keeps case values
};

/// One 5-minute realization inside an hour.
struct IntervalRealization {
  int hour = 0;
  int interval = 0;  // 0..11
  Vector demand_mw;  // per bus
  Vector wind_mw;    // per wind farm
};

inline constexpr int kIntervalsPerHour = 12;

struct IntervalRecord {
  int hour = 0;
  int interval = 0;
  double ace_mw = 0;
  double omega_total_mw = 0;  // total deviation from forecast
  double cost = 0;            // energy-delivered cost of the 5-minute slice
  Vector p_mw;                // clipped generator outputs
  Vector flows_mw;
  std::vector<int> ramp_violations;  // generator ids
  std::vector<int> overloads;        // line indices
  Vector overload_mw;                // per line, max(|f| - fmax, 0)
};

struct SimulationReport {
  int hours_total = 0;
  int hours_solved = 0;
  std::vector<int> infeasible_hours;
  long intervals = 0;
  double total_cost = 0;  // realized generation cost over the study
  double ace_mean = 0;
  double ace_max = 0;
  std::vector<double> ace_sorted;  // empirical CDF support points
  std::map<int, int> ramp_violations_by_gen;  // generator id -> intervals
  std::map<int, int> overloads_by_line;       // line index -> intervals
  std::map<int, double> max_overload_by_line; // line index -> MW
};

struct StudyParams {
  std::string method = "rcc";  // det | cc | rcc
  double gamma_mu = 0.6;
  double gamma_sigma = 0.6;
  std::optional<double> eps_gen;   // overrides every generator epsilon
  std::optional<double> eps_line;  // overrides every line epsilon
  double det_alpha = 0.05;         // fixed participation in the det method
  bool use_socp_direct = false;    // cc only: solve via the conic route
  CuttingPlaneConfig solver;
};

/// Copy of the case with an hour scenario applied (forecasts, commitment,
/// fixed outputs, epsilon overrides).
GridCase apply_scenario(const GridCase& base, const HourScenario& scenario,
                        const StudyParams& params);

struct Step1Result {
  bool feasible = false;
  Vector p_mw;   // per generator
  Vector alpha;  // per generator
  double objective = 0;
  SolveDiagnostics diagnostics;
};

/// Hour-ahead dispatch. The deterministic method fixes the participation
/// factors (no alpha decision); cc/rcc solve the corresponding formulation.
Step1Result step1_dispatch(const GridCase& hour_case, const WindUncertainty& u_mw,
                           const StudyParams& params,
                           std::shared_ptr<const NetworkSensitivities> sens);

/// Quasi-static replay of a fixed (p*, alpha*) against 5-minute realizations:
/// proportional response, clipping to generator limits, DC power flow, ACE
/// and violation bookkeeping. Deterministic: identical inputs give
/// bit-identical records.
std::vector<IntervalRecord> step2_replay(
    const GridCase& hour_case, const NetworkSensitivities& sens,
    const Vector& p_star_mw, const Vector& alpha_star,
    const std::vector<IntervalRealization>& realizations);

/// Reduces interval records (plus per-hour feasibility outcomes) into the
/// study report.
SimulationReport aggregate(const std::vector<IntervalRecord>& records,
                           int hours_total, const std::vector<int>& infeasible_hours);

/// Whole-study driver: Step 1 + Step 2 per hour, hours solved independently
/// across `workers` threads, deterministic hour-ordered assembly.
struct StudyInput {
  const GridCase* grid = nullptr;
  WindUncertainty uncertainty_mw;
  std::vector<HourScenario> scenarios;
  std::map<int, std::vector<IntervalRealization>> realizations;  // by hour
};

struct HourOutcome {
  int hour = 0;
  bool feasible = false;
  double objective = 0;
  Vector p_mw;
  Vector alpha;
  SolveDiagnostics diagnostics;
};

struct StudyResult {
  SimulationReport report;
  std::vector<IntervalRecord> records;
  std::vector<HourOutcome> hours;
};

StudyResult run_study(const StudyInput& input, const StudyParams& params,
                      int workers = 1);

}  // namespace rccopf
