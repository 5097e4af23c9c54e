#pragma once

#include <random>

#include "rccopf/grid.hpp"
#include "rccopf/sim.hpp"
#include "rccopf/uncertainty.hpp"

namespace rccopf {

/// Knobs of the synthetic study generator. Capacities and ramp limits are
/// sized from a proportional dispatch plus the worst-case response margins,
/// so generated instances are feasible across the whole budget range while
/// still carrying binding constraints.
struct SynthOptions {
  Index buses = 30;
  Index generators = 6;
  Index wind_farms = 3;
  unsigned seed = 1;
  double extra_line_fraction = 0.5;  // lines beyond the spanning tree
  double demand_scale = 1.0;
  double line_margin = 1.25;     // capacity over the worst-case flow band
  double tighten_fraction = 0.2; // share of lines squeezed to bind sometimes
  double gamma = 0.6;
  double eps_gen = kDefaultGenEps;
  double eps_line = kDefaultLineEps;
  bool with_hydro = false;  // adds fixed-output units with a shared factor
};

struct SynthCase {
  GridCase grid;
  WindUncertainty uncertainty_mw;
};

SynthCase synth_case(const SynthOptions& options);

/// Random hourly forecasts and 5-minute realizations for a generated case:
/// load follows a smooth profile with noise, wind deviations are Gaussian
/// draws around the forecast with the case's nominal sigma.
struct SynthSeriesOptions {
  int hours = 2;
  unsigned seed = 7;
  double load_noise = 0.01;  // relative 5-minute load wobble
};

struct SynthSeries {
  std::vector<HourScenario> scenarios;
  std::map<int, std::vector<IntervalRealization>> realizations;
};

SynthSeries synth_series(const SynthCase& c, const SynthSeriesOptions& options);

}  // namespace rccopf
