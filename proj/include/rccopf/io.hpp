#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rccopf/grid.hpp"
#include "rccopf/model.hpp"
#include "rccopf/sim.hpp"
#include "rccopf/uncertainty.hpp"

namespace rccopf {

using Json = nlohmann::json;

/// "0.0025" / 0.0025 / "1/6" are all accepted wherever a probability or
/// budget appears, so tuned fraction defaults survive without rounding.
double parse_probability(const Json& value);
double parse_probability_string(const std::string& text);

struct LoadedCase {
  GridCase grid;
  WindUncertainty uncertainty_mw;
  std::vector<std::string> warnings;  // merges performed during ingestion
};

/// Parses, normalizes (parallel lines, co-located wind) and validates a case
/// document. Every violation names the offending element.
LoadedCase parse_case(const Json& doc);
LoadedCase load_case(const std::string& path);

Json case_to_json(const GridCase& grid, const WindUncertainty& u_mw);
void save_case(const GridCase& grid, const WindUncertainty& u_mw,
               const std::string& path);

/// Hourly forecasts and 5-minute realizations, keyed back to the case's
/// buses and wind farms. Timestamps must be ISO-8601, monotone, and every
/// forecast hour needs exactly twelve realization intervals per series.
struct TimeSeries {
  std::vector<HourScenario> scenarios;
  std::map<int, std::vector<IntervalRealization>> realizations;
  std::vector<std::string> hour_stamps;  // ISO timestamp per hour index
};

TimeSeries load_time_series(const GridCase& grid, const std::string& forecasts_csv,
                            const std::string& realizations_csv);

void save_forecasts_csv(const GridCase& grid, const std::vector<HourScenario>& scenarios,
                        const std::vector<std::string>& hour_stamps,
                        const std::string& path);
void save_realizations_csv(
    const GridCase& grid, const std::vector<HourScenario>& scenarios,
    const std::map<int, std::vector<IntervalRealization>>& realizations,
    const std::vector<std::string>& hour_stamps, const std::string& path);

/// ISO stamps for synthetic studies: `start` plus one hour per scenario.
std::vector<std::string> hourly_stamps(const std::string& start_iso, int hours);

/// Per-interval detail, one CSV row per (hour, interval) plus a metadata
/// comment carrying the study shape; reaggregation of a written file
/// reproduces the report exactly.
struct IntervalsFile {
  std::vector<IntervalRecord> records;
  int hours_total = 0;
  std::vector<int> infeasible_hours;
};
void write_intervals_csv(const std::vector<IntervalRecord>& records,
                         int hours_total, const std::vector<int>& infeasible_hours,
                         const std::string& path);
IntervalsFile read_intervals_csv(const std::string& path);

Json report_to_json(const SimulationReport& report);
Json solution_to_json(const GridCase& grid, const DispatchSolution& solution);
Json diagnostics_to_json(const SolveDiagnostics& diagnostics);

/// Deterministic serialization used for every artifact this tool writes.
void write_json(const Json& doc, const std::string& path);
Json read_json(const std::string& path);

}  // namespace rccopf
