#include "rccopf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "rccopf/barrier.hpp"

namespace rccopf {

GridCase apply_scenario(const GridCase& base, const HourScenario& scenario,
                        const StudyParams& params) {
  GridCase g = base;
  if (scenario.demand_mw.size() > 0) {
    if (scenario.demand_mw.size() != g.bus_count()) {
      throw InvalidInput("scenario demand vector does not match bus count");
    }
    for (Bus& b : g.buses) b.demand_mw = scenario.demand_mw[b.id];
  }
  if (scenario.wind_forecast_mw.size() > 0) {
    if (scenario.wind_forecast_mw.size() !=
        static_cast<Index>(g.wind_farms.size())) {
      throw InvalidInput("scenario wind vector does not match wind farm count");
    }
    for (size_t w = 0; w < g.wind_farms.size(); ++w) {
      g.wind_farms[w].forecast_mw = scenario.wind_forecast_mw[static_cast<Index>(w)];
    }
  }
  if (!scenario.commitment.empty()) {
    if (scenario.commitment.size() != g.generators.size()) {
      throw InvalidInput("scenario commitment mask does not match generator count");
    }
    for (size_t i = 0; i < g.generators.size(); ++i) {
      g.generators[i].in_service = scenario.commitment[i] != 0;
    }
  }
  if (scenario.fixed_output_mw.size() > 0) {
    if (scenario.fixed_output_mw.size() != static_cast<Index>(g.generators.size())) {
      throw InvalidInput("scenario fixed-output vector does not match generator count");
    }
    for (size_t i = 0; i < g.generators.size(); ++i) {
      if (!g.generators[i].dispatchable) {
        g.generators[i].fixed_output_mw =
            scenario.fixed_output_mw[static_cast<Index>(i)];
      }
    }
  }
  if (params.eps_gen) {
    for (Generator& gen : g.generators) gen.eps = *params.eps_gen;
  }
  if (params.eps_line) {
    for (Line& line : g.lines) line.eps = *params.eps_line;
  }
  return g;
}

Step1Result step1_dispatch(const GridCase& hour_case, const WindUncertainty& u_mw,
                           const StudyParams& params,
                           std::shared_ptr<const NetworkSensitivities> sens) {
  Step1Result out;
  const size_t ng = hour_case.generators.size();

  if (params.method == "det") {
    const OpfModel model = build_deterministic(hour_case, sens);
    const auto solved = solve_cutting_plane(model, params.solver);
    out.diagnostics = solved.diagnostics;
    if (solved.master_status != MasterStatus::Optimal) return out;
    out.feasible = true;
    out.p_mw = solved.solution.p_mw;
    out.objective = solved.solution.objective;
    // Fixed participation for every in-service unit; explicitly fixed
    // factors (e.g. must-run nuclear) keep their configured value.
    out.alpha = Vector::Zero(static_cast<Index>(ng));
    for (size_t i = 0; i < ng; ++i) {
      const Generator& g = hour_case.generators[i];
      if (!g.in_service) continue;
      out.alpha[static_cast<Index>(i)] = g.alpha_policy == AlphaPolicy::Fixed
                                             ? g.alpha_value
                                             : params.det_alpha;
    }
    return out;
  }

  OpfModel model;
  if (params.method == "cc") {
    GaussianSpec spec{Vector::Zero(u_mw.size()), u_mw.sigma2};
    model = build_cc(hour_case, spec, sens);
  } else if (params.method == "rcc") {
    WindUncertainty u = u_mw;
    u.gamma_mu = params.gamma_mu;
    u.gamma_sigma = params.gamma_sigma;
    model = build_rcc(hour_case, u, sens);
  } else {
    throw InvalidInput("unknown dispatch method '" + params.method + "'");
  }

  if (params.use_socp_direct && params.method == "cc") {
    const BarrierOutcome direct = solve_socp_direct(model);
    if (!direct.feasible) return out;
    out.feasible = true;
    out.p_mw = direct.solution.p_mw;
    out.alpha = direct.solution.alpha;
    out.objective = direct.solution.objective;
    return out;
  }

  const auto solved = solve_cutting_plane(model, params.solver);
  out.diagnostics = solved.diagnostics;
  if (solved.master_status != MasterStatus::Optimal || !solved.converged) {
    out.feasible = solved.master_status == MasterStatus::Optimal && solved.converged;
    return out;
  }
  out.feasible = true;
  out.p_mw = solved.solution.p_mw;
  out.alpha = solved.solution.alpha;
  out.objective = solved.solution.objective;
  return out;
}

std::vector<IntervalRecord> step2_replay(
    const GridCase& hour_case, const NetworkSensitivities& sens,
    const Vector& p_star_mw, const Vector& alpha_star,
    const std::vector<IntervalRealization>& realizations) {
  const size_t ng = hour_case.generators.size();
  const Index nb = hour_case.bus_count();
  const Index nw = static_cast<Index>(hour_case.wind_farms.size());

  std::vector<IntervalRecord> records;
  records.reserve(realizations.size());

  for (const IntervalRealization& r : realizations) {
    if (r.demand_mw.size() != nb || r.wind_mw.size() != nw) {
      throw InvalidInput("realization vectors do not match the case dimensions");
    }
    IntervalRecord rec;
    rec.hour = r.hour;
    rec.interval = r.interval;

    // Total deviation from the hour-ahead forecast.
    double omega = 0;
    for (Index w = 0; w < nw; ++w) {
      omega += r.wind_mw[w] - hour_case.wind_farms[static_cast<size_t>(w)].forecast_mw;
    }
    rec.omega_total_mw = omega;

    rec.p_mw = Vector::Zero(static_cast<Index>(ng));
    double total_gen = 0;
    for (size_t i = 0; i < ng; ++i) {
      const Generator& g = hour_case.generators[i];
      if (!g.in_service) continue;
      const double response = -alpha_star[static_cast<Index>(i)] * omega;
      const double raw = p_star_mw[static_cast<Index>(i)] + response;
      const double clipped = std::max(g.p_min_mw, std::min(raw, g.p_max_mw));
      rec.p_mw[static_cast<Index>(i)] = clipped;
      total_gen += clipped;
      rec.cost += (g.cost_quad * clipped * clipped + g.cost_lin * clipped) / 12.0;

      // Response-magnitude ramp rule: the regulation movement within the
      // interval against the directional limits.
      if (response > g.ramp_up_mw || -response > g.ramp_down_mw) {
        rec.ramp_violations.push_back(g.id);
      }
    }

    rec.ace_mw = (r.demand_mw.sum() - r.wind_mw.sum()) - total_gen;

    Vector inj = -r.demand_mw;
    for (Index w = 0; w < nw; ++w) {
      inj[hour_case.wind_farms[static_cast<size_t>(w)].bus] += r.wind_mw[w];
    }
    for (size_t i = 0; i < ng; ++i) {
      inj[hour_case.generators[i].bus] += rec.p_mw[static_cast<Index>(i)];
    }
    const PowerFlowResult pf = solve_dc_power_flow(hour_case, sens, inj);
    rec.flows_mw = pf.flows_mw;
    rec.overload_mw = Vector::Zero(static_cast<Index>(hour_case.lines.size()));
    for (size_t li = 0; li < hour_case.lines.size(); ++li) {
      const double over =
          std::abs(pf.flows_mw[static_cast<Index>(li)]) - hour_case.lines[li].capacity_mw;
      if (over > 0) {
        rec.overloads.push_back(static_cast<int>(li));
        rec.overload_mw[static_cast<Index>(li)] = over;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

SimulationReport aggregate(const std::vector<IntervalRecord>& records,
                           int hours_total, const std::vector<int>& infeasible_hours) {
  SimulationReport rep;
  rep.hours_total = hours_total;
  rep.infeasible_hours = infeasible_hours;
  rep.hours_solved = hours_total - static_cast<int>(infeasible_hours.size());
  rep.intervals = static_cast<long>(records.size());

  rep.ace_sorted.reserve(records.size());
  for (const IntervalRecord& rec : records) {
    rep.total_cost += rec.cost;
    rep.ace_sorted.push_back(rec.ace_mw);
    for (int gid : rec.ramp_violations) rep.ramp_violations_by_gen[gid] += 1;
    for (int li : rec.overloads) {
      rep.overloads_by_line[li] += 1;
      rep.max_overload_by_line[li] =
          std::max(rep.max_overload_by_line[li], rec.overload_mw[li]);
    }
  }
  std::sort(rep.ace_sorted.begin(), rep.ace_sorted.end());
  if (!records.empty()) {
    double sum = 0;
    for (double a : rep.ace_sorted) sum += a;
    rep.ace_mean = sum / static_cast<double>(records.size());
    rep.ace_max = rep.ace_sorted.back();
  }
  return rep;
}

StudyResult run_study(const StudyInput& input, const StudyParams& params,
                      int workers) {
  if (input.grid == nullptr) throw InvalidInput("study input has no grid");
  const GridCase& base = *input.grid;
  base.validate();

  const auto sens = std::make_shared<const NetworkSensitivities>(
      base, base.monitored_buses());

  const int n_hours = static_cast<int>(input.scenarios.size());
  std::vector<HourOutcome> hours(static_cast<size_t>(n_hours));
  std::vector<std::vector<IntervalRecord>> per_hour(static_cast<size_t>(n_hours));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int h = next.fetch_add(1);
      if (h >= n_hours) break;
      const HourScenario& sc = input.scenarios[static_cast<size_t>(h)];
      const GridCase hour_case = apply_scenario(base, sc, params);
      HourOutcome& out = hours[static_cast<size_t>(h)];
      out.hour = sc.hour;
      const Step1Result step1 =
          step1_dispatch(hour_case, input.uncertainty_mw, params, sens);
      out.feasible = step1.feasible;
      out.diagnostics = step1.diagnostics;
      if (!step1.feasible) continue;
      out.objective = step1.objective;
      out.p_mw = step1.p_mw;
      out.alpha = step1.alpha;
      const auto it = input.realizations.find(sc.hour);
      if (it != input.realizations.end()) {
        per_hour[static_cast<size_t>(h)] =
            step2_replay(hour_case, *sens, step1.p_mw, step1.alpha, it->second);
      }
    }
  };

  const int n_threads = std::max(1, std::min(workers, n_hours));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  StudyResult result;
  std::vector<int> infeasible;
  for (int h = 0; h < n_hours; ++h) {
    if (!hours[static_cast<size_t>(h)].feasible) {
      infeasible.push_back(input.scenarios[static_cast<size_t>(h)].hour);
      continue;
    }
    result.records.insert(result.records.end(),
                          per_hour[static_cast<size_t>(h)].begin(),
                          per_hour[static_cast<size_t>(h)].end());
  }
  result.hours = std::move(hours);
  result.report = aggregate(result.records, n_hours, infeasible);
  return result;
}

}  // namespace rccopf
