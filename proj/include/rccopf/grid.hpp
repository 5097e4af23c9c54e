#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rccopf/types.hpp"
#include "rccopf/uncertainty.hpp"

namespace rccopf {

inline constexpr double kDefaultGenEps = 1.0 / 6.0;
inline constexpr double kDefaultLineEps = 0.0025;

struct Bus {
  int id = 0;             // contiguous 0-based index after load
  double demand_mw = 0;
  bool is_reference = false;
};

struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 0;   // per-unit, > 0
  double capacity_mw = 0;   // > 0
  double eps = kDefaultLineEps;  // in (0, 0.5)
};

/// How a generator's participation factor enters the model.
enum class AlphaPolicy {
  Variable,  // its own decision variable
  Shared,    // one decision variable common to all Shared generators
  Fixed,     // constant alpha_value (e.g. zero for must-run nuclear)
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min_mw = 0;
  double p_max_mw = 0;
  double ramp_up_mw = 0;    // per OPF period
  double ramp_down_mw = 0;
  double cost_lin = 0;      // $/MWh
  double cost_quad = 0;     // $/MW^2h, >= 0
  double eps = kDefaultGenEps;
  bool dispatchable = true;     // false: output fixed (hydro/nuclear style)
  double fixed_output_mw = 0;   // used when !dispatchable
  AlphaPolicy alpha_policy = AlphaPolicy::Variable;
  double alpha_value = 0;       // used when alpha_policy == Fixed
  bool in_service = true;       // hourly commitment mask
};

struct WindFarm {
  int bus = 0;
  double forecast_mw = 0;  // >= 0
};

/// Full static network. Bus ids are contiguous 0..n-1 once a case has been
/// loaded or validated; co-located wind farms and parallel lines have been
/// merged by then.
struct GridCase {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<WindFarm> wind_farms;
  std::vector<int> monitored_lines;  // indices into `lines`; empty = all

  int reference_bus() const;
  Index bus_count() const { return static_cast<Index>(buses.size()); }

  double total_demand_mw() const;
  double total_wind_forecast_mw() const;

  /// Indices of the lines whose limits the formulations enforce.
  std::vector<int> effective_monitored_lines() const;

  /// Buses touched by a monitored line; these need sensitivity rows.
  std::vector<int> monitored_buses() const;

  /// Checks every structural invariant (one reference bus, contiguous bus
  /// ids, positive susceptances and capacities, epsilon ranges, bound
  /// ordering, connectivity, referential integrity). Throws InvalidInput
  /// with the offending element named. Warnings (merged parallel lines,
  /// merged co-located wind farms) are appended to `warnings` if given.
  void validate(std::vector<std::string>* warnings = nullptr) const;

  /// Merges parallel lines (susceptances add; the merged capacity is the
  /// DC-equivalent binding limit min_i(cap_i/beta_i) * beta_total) and
  /// co-located wind farms (forecasts add). Returns merge warnings.
  std::vector<std::string> normalize();
};

/// Connected components of the line graph; used for diagnostics.
std::vector<std::vector<int>> connected_components(Index bus_count,
                                                   const std::vector<Line>& lines);

}  // namespace rccopf
