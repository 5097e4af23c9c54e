#include "rccopf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rccopf/sensitivities.hpp"

namespace rccopf {

SynthCase synth_case(const SynthOptions& opt) {
  if (opt.buses < 2 || opt.generators < 1) {
    throw InvalidInput("synthetic case needs at least 2 buses and 1 generator");
  }
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SynthCase out;
  GridCase& g = out.grid;
  g.base_mva = 100.0;

  for (Index b = 0; b < opt.buses; ++b) {
    Bus bus;
    bus.id = static_cast<int>(b);
    bus.is_reference = b == 0;
    bus.demand_mw = unif(rng) < 0.6 ? (20.0 + 60.0 * unif(rng)) * opt.demand_scale : 0.0;
    g.buses.push_back(bus);
  }

  // Random spanning tree plus extra chords.
  std::set<std::pair<int, int>> used;
  auto add_line = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (a == b || !used.insert(key).second) return;
    Line l;
    l.from = key.first;
    l.to = key.second;
    l.susceptance = 4.0 + 12.0 * unif(rng);
    l.capacity_mw = 1.0;  // sized below
    l.eps = opt.eps_line;
    g.lines.push_back(l);
  };
  for (Index b = 1; b < opt.buses; ++b) {
    add_line(static_cast<int>(unif(rng) * static_cast<double>(b)), static_cast<int>(b));
  }
  const Index extra = static_cast<Index>(opt.extra_line_fraction *
                                         static_cast<double>(opt.buses));
  for (Index e = 0; e < extra; ++e) {
    add_line(static_cast<int>(unif(rng) * static_cast<double>(opt.buses)),
             static_cast<int>(unif(rng) * static_cast<double>(opt.buses)));
  }

  // Wind farms at distinct non-reference buses.
  std::vector<int> shuffled(static_cast<size_t>(opt.buses) - 1);
  std::iota(shuffled.begin(), shuffled.end(), 1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const Index nw = std::min<Index>(opt.wind_farms, opt.buses - 1);
  out.uncertainty_mw.sigma2 = Vector::Zero(nw);
  out.uncertainty_mw.mu_half = Vector::Zero(nw);
  out.uncertainty_mw.sigma2_half = Vector::Zero(nw);
  out.uncertainty_mw.gamma_mu = opt.gamma;
  out.uncertainty_mw.gamma_sigma = opt.gamma;
  for (Index w = 0; w < nw; ++w) {
    WindFarm farm;
    farm.bus = shuffled[static_cast<size_t>(w)];
    farm.forecast_mw = (30.0 + 60.0 * unif(rng)) * opt.demand_scale;
    g.wind_farms.push_back(farm);
    const double sigma = (0.10 + 0.20 * unif(rng)) * farm.forecast_mw;
    out.uncertainty_mw.sigma2[w] = sigma * sigma;
    out.uncertainty_mw.mu_half[w] = (0.1 + 0.3 * unif(rng)) * sigma;
    out.uncertainty_mw.sigma2_half[w] = (0.2 + 0.6 * unif(rng)) * sigma * sigma;
  }

  // Worst-case response band of the total deviation.
  const double worst_var = out.uncertainty_mw.sigma2.sum() +
                           out.uncertainty_mw.sigma2_half.sum();
  const double worst_mean = out.uncertainty_mw.mu_half.sum();
  const double kappa_gen = inv_norm_cdf(1.0 - opt.eps_gen);
  const double band = worst_mean + 3.0 * std::sqrt(worst_var);

  // Net load must clear the response band with room to spare, otherwise the
  // minimum-output chance constraints cannot hold (generation would have to
  // back down below zero under upward wind surprises).
  {
    const double needed = g.total_wind_forecast_mw() + 2.5 * band + 10.0;
    const double demand_total = g.total_demand_mw();
    if (demand_total < needed) {
      const double scale = needed / std::max(demand_total, 1.0);
      for (Bus& b : g.buses) b.demand_mw *= scale;
    }
  }

  const double net_load =
      std::max(g.total_demand_mw() - g.total_wind_forecast_mw(), 10.0);

  // Generators at distinct buses (reusing the shuffle tail keeps them apart
  // from the wind buses when the case is large enough).
  const Index ng = opt.generators;
  Vector p_prop = Vector::Zero(ng);
  for (Index i = 0; i < ng; ++i) {
    Generator gen;
    gen.id = static_cast<int>(i);
    const size_t pos = static_cast<size_t>(nw) + static_cast<size_t>(i);
    gen.bus = pos < shuffled.size()
                  ? shuffled[pos]
                  : shuffled[static_cast<size_t>(unif(rng) * shuffled.size())];
    gen.eps = opt.eps_gen;
    const double share = (0.6 + 0.8 * unif(rng));
    p_prop[i] = net_load / static_cast<double>(ng) * share;
    gen.p_min_mw = 0.0;
    gen.p_max_mw = p_prop[i] * (1.5 + 0.8 * unif(rng)) +
                   band * (1.2 + unif(rng)) / static_cast<double>(ng) * 2.0;
    const double ramp = kappa_gen * std::sqrt(worst_var) + worst_mean;
    gen.ramp_up_mw = ramp * (0.8 + 1.2 * unif(rng));
    gen.ramp_down_mw = ramp * (0.8 + 1.2 * unif(rng));
    gen.cost_quad = 0.01 + 0.05 * unif(rng);
    gen.cost_lin = 15.0 + 25.0 * unif(rng);
    g.generators.push_back(gen);
  }
  // Rescale the proportional dispatch to balance exactly.
  p_prop *= net_load / p_prop.sum();

  if (opt.with_hydro && ng >= 3) {
    // Last two units become fixed-output with a common participation factor.
    for (Index i = ng - 2; i < ng; ++i) {
      Generator& gen = g.generators[static_cast<size_t>(i)];
      gen.dispatchable = false;
      gen.fixed_output_mw = p_prop[i];
      gen.alpha_policy = AlphaPolicy::Shared;
    }
  }

  // Line capacities: proportional-dispatch flow plus the worst-case response
  // band through the line's sensitivity row, with a margin. A tightened
  // subset keeps the cutting planes honest.
  NetworkSensitivities sens(g, g.monitored_buses());
  Vector inj = Vector::Zero(opt.buses);
  for (const Bus& b : g.buses) inj[b.id] -= b.demand_mw;
  for (const WindFarm& w : g.wind_farms) inj[w.bus] += w.forecast_mw;
  for (Index i = 0; i < ng; ++i) inj[g.generators[static_cast<size_t>(i)].bus] += p_prop[i];
  const PowerFlowResult pf = solve_dc_power_flow(g, sens, inj);

  for (size_t li = 0; li < g.lines.size(); ++li) {
    Line& l = g.lines[li];
    const Vector ptdf = l.susceptance * (sens.pi_row(l.from) - sens.pi_row(l.to));
    // Unavoidable deviation band: the direct wind terms cannot be cancelled
    // by any response assignment, so capacity must clear them even on
    // tightened lines. The response allowance only pads the loose ones.
    double reach = 0;
    for (Index w = 0; w < nw; ++w) {
      reach += std::abs(ptdf[g.wind_farms[static_cast<size_t>(w)].bus]) *
               (out.uncertainty_mw.mu_half[w] +
                3.0 * std::sqrt(out.uncertainty_mw.sigma2[w] +
                                out.uncertainty_mw.sigma2_half[w]));
    }
    const double flow = std::abs(pf.flows_mw[static_cast<Index>(li)]);
    l.capacity_mw =
        unif(rng) < opt.tighten_fraction
            ? 1.15 * flow + 1.08 * reach + 2.0
            : 1.25 * flow + opt.line_margin * (reach + 0.2 * band) + 5.0;
  }

  g.normalize();
  g.validate();
  out.uncertainty_mw.validate();
  return out;
}

SynthSeries synth_series(const SynthCase& c, const SynthSeriesOptions& opt) {
  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const GridCase& g = c.grid;
  const Index nb = g.bus_count();
  const Index nw = static_cast<Index>(g.wind_farms.size());

  SynthSeries out;
  for (int h = 0; h < opt.hours; ++h) {
    HourScenario sc;
    sc.hour = h;
    // Hourly profile around the case point. Demand never drops below the
    // case value and wind never exceeds it, so the net load stays above the
    // response band the case was sized for.
    const double load_factor = 1.0 + 0.08 * unif(rng);
    sc.demand_mw = Vector::Zero(nb);
    for (const Bus& b : g.buses) sc.demand_mw[b.id] = b.demand_mw * load_factor;
    sc.wind_forecast_mw = Vector::Zero(nw);
    for (Index w = 0; w < nw; ++w) {
      sc.wind_forecast_mw[w] =
          std::max(0.0, g.wind_farms[static_cast<size_t>(w)].forecast_mw *
                            (0.9 + 0.1 * unif(rng)));
    }

    std::vector<IntervalRealization> intervals;
    for (int tau = 0; tau < kIntervalsPerHour; ++tau) {
      IntervalRealization r;
      r.hour = h;
      r.interval = tau;
      r.demand_mw = sc.demand_mw *
                    (1.0 + opt.load_noise * normal(rng));
      r.wind_mw = Vector::Zero(nw);
      for (Index w = 0; w < nw; ++w) {
        const double sigma = std::sqrt(c.uncertainty_mw.sigma2[w]);
        r.wind_mw[w] = std::max(0.0, sc.wind_forecast_mw[w] + sigma * normal(rng));
      }
      intervals.push_back(std::move(r));
    }
    out.realizations[h] = std::move(intervals);
    out.scenarios.push_back(std::move(sc));
  }
  return out;
}

}  // namespace rccopf
