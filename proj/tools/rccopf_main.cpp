#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "rccopf/barrier.hpp"
#include "rccopf/cutting_plane.hpp"
#include "rccopf/io.hpp"
#include "rccopf/synth.hpp"

namespace fs = std::filesystem;
using namespace rccopf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitIoError = 3;

struct CommonOptions {
  std::string case_path;
  std::string method = "rcc";
  double gamma = 0.6;
  std::optional<double> gamma_mu;
  std::optional<double> gamma_sigma;
  std::string eps_gen;   // empty keeps per-element case values
  std::string eps_line;
  double tol = 1e-6;
  int max_iter = 200;
  std::string master = "qp";
  int pwl_segments = 20;
  bool socp_direct = false;
  int workers = 1;
  std::string out_dir = "out";
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_series_params) {
  cmd->add_option("--case", opt.case_path, "case file (JSON)")
      ->required()
      ->envname("RCCOPF_CASE");
  cmd->add_option("--method", opt.method, "dispatch method")
      ->check(CLI::IsMember({"det", "cc", "rcc"}))
      ->envname("RCCOPF_METHOD");
  cmd->add_option("--gamma", opt.gamma,
                  "uncertainty budget (sets both mean and variance budgets)")
      ->envname("RCCOPF_GAMMA");
  cmd->add_option("--gamma-mu", opt.gamma_mu, "mean budget override");
  cmd->add_option("--gamma-sigma", opt.gamma_sigma, "variance budget override");
  cmd->add_option("--eps-gen", opt.eps_gen,
                  "generator epsilon for every unit (decimal or fraction)")
      ->envname("RCCOPF_EPS_GEN");
  cmd->add_option("--eps-line", opt.eps_line,
                  "line epsilon for every line (decimal or fraction)")
      ->envname("RCCOPF_EPS_LINE");
  cmd->add_option("--tol", opt.tol, "chance-constraint feasibility tolerance")
      ->envname("RCCOPF_TOL");
  cmd->add_option("--max-iter", opt.max_iter, "cutting-plane iteration limit")
      ->envname("RCCOPF_MAX_ITER");
  cmd->add_option("--master", opt.master, "master backend")
      ->check(CLI::IsMember(master_backends()))
      ->envname("RCCOPF_MASTER");
  cmd->add_option("--pwl-segments", opt.pwl_segments,
                  "tangents per quadratic variable in the lp master");
  cmd->add_flag("--socp-direct", opt.socp_direct,
                "solve cc through the conic route instead of cutting planes");
  if (with_series_params) {
    cmd->add_option("--workers", opt.workers, "parallel hourly solves")
        ->envname("RCCOPF_WORKERS");
  }
  cmd->add_option("--out", opt.out_dir, "output directory")
      ->envname("RCCOPF_OUT");
}

StudyParams to_params(const CommonOptions& opt) {
  StudyParams params;
  params.method = opt.method;
  params.gamma_mu = opt.gamma_mu.value_or(opt.gamma);
  params.gamma_sigma = opt.gamma_sigma.value_or(opt.gamma);
  if (!opt.eps_gen.empty()) params.eps_gen = parse_probability_string(opt.eps_gen);
  if (!opt.eps_line.empty()) params.eps_line = parse_probability_string(opt.eps_line);
  params.use_socp_direct = opt.socp_direct;
  params.solver.feasibility_tol = opt.tol;
  params.solver.max_iterations = opt.max_iter;
  params.solver.master_backend = opt.master;
  params.solver.pwl_segments = opt.pwl_segments;
  return params;
}

Json params_json(const StudyParams& p) {
  Json doc;
  doc["method"] = p.method;
  doc["gamma_mu"] = p.gamma_mu;
  doc["gamma_sigma"] = p.gamma_sigma;
  if (p.eps_gen) doc["eps_gen"] = *p.eps_gen;
  if (p.eps_line) doc["eps_line"] = *p.eps_line;
  doc["tol"] = p.solver.feasibility_tol;
  doc["max_iter"] = p.solver.max_iterations;
  doc["master"] = p.solver.master_backend;
  doc["pwl_segments"] = p.solver.pwl_segments;
  doc["socp_direct"] = p.use_socp_direct;
  doc["det_alpha"] = p.det_alpha;
  return doc;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const Json& parameters, const Json& inputs,
                    const Json& artifacts) {
  Json doc;
  doc["tool"] = "rccopf";
  doc["version"] = version();
  doc["command"] = command;
  doc["parameters"] = parameters;
  doc["inputs"] = inputs;
  doc["artifacts"] = artifacts;
  write_json(doc, out_dir + "/manifest.json");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + dir + "'");
}

int cmd_solve(const CommonOptions& opt) {
  const LoadedCase loaded = load_case(opt.case_path);
  for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
  ensure_out_dir(opt.out_dir);

  const StudyParams params = to_params(opt);
  const GridCase hour_case = apply_scenario(loaded.grid, {}, params);
  const auto sens = std::make_shared<const NetworkSensitivities>(
      hour_case, hour_case.monitored_buses());
  const Step1Result result =
      step1_dispatch(hour_case, loaded.uncertainty_mw, params, sens);

  if (!result.feasible) {
    std::cerr << "infeasible: " << result.diagnostics.termination << "\n";
    write_manifest(opt.out_dir, "solve", params_json(params),
                   Json{{"case", opt.case_path}}, Json::array());
    return kExitInfeasible;
  }

  DispatchSolution solution;
  solution.p_mw = result.p_mw;
  solution.alpha = result.alpha;
  solution.objective = result.objective;
  solution.diagnostics = result.diagnostics;
  // Network quantities for the report.
  Vector inj = Vector::Zero(hour_case.bus_count());
  for (const Bus& b : hour_case.buses) inj[b.id] -= b.demand_mw;
  for (const WindFarm& w : hour_case.wind_farms) inj[w.bus] += w.forecast_mw;
  for (size_t i = 0; i < hour_case.generators.size(); ++i) {
    inj[hour_case.generators[i].bus] += result.p_mw[static_cast<Index>(i)];
  }
  const PowerFlowResult pf = solve_dc_power_flow(hour_case, *sens, inj);
  solution.theta = pf.theta;
  solution.flows_mw = pf.flows_mw;
  Vector alpha_by_bus = Vector::Zero(hour_case.bus_count());
  for (size_t i = 0; i < hour_case.generators.size(); ++i) {
    alpha_by_bus[hour_case.generators[i].bus] += result.alpha[static_cast<Index>(i)];
  }
  solution.delta = params.method == "det"
                       ? Vector::Zero(hour_case.bus_count())
                       : solve_delta(*sens, alpha_by_bus);

  write_json(solution_to_json(hour_case, solution), opt.out_dir + "/solution.json");
  write_manifest(opt.out_dir, "solve", params_json(params),
                 Json{{"case", opt.case_path}},
                 Json::array({"solution.json"}));
  std::printf("objective %.6f  iterations %d  cuts %zu  wall %.3fs\n",
              solution.objective, result.diagnostics.iterations,
              result.diagnostics.cut_labels.size(),
              result.diagnostics.wall_seconds);
  return kExitOk;
}

int cmd_simulate(const CommonOptions& opt, const std::string& forecasts,
                 const std::string& realizations) {
  const LoadedCase loaded = load_case(opt.case_path);
  for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
  const TimeSeries series = load_time_series(loaded.grid, forecasts, realizations);
  ensure_out_dir(opt.out_dir);

  const StudyParams params = to_params(opt);
  StudyInput input;
  input.grid = &loaded.grid;
  input.uncertainty_mw = loaded.uncertainty_mw;
  input.scenarios = series.scenarios;
  input.realizations = series.realizations;

  const StudyResult result = run_study(input, params, opt.workers);

  write_intervals_csv(result.records, result.report.hours_total,
                      result.report.infeasible_hours,
                      opt.out_dir + "/intervals.csv");
  write_json(report_to_json(result.report), opt.out_dir + "/report.json");
  Json hours = Json::array();
  for (const HourOutcome& h : result.hours) {
    hours.push_back(Json{{"hour", h.hour},
                         {"feasible", h.feasible},
                         {"objective", h.objective},
                         {"iterations", h.diagnostics.iterations}});
  }
  write_json(hours, opt.out_dir + "/hours.json");
  write_manifest(opt.out_dir, "simulate", params_json(params),
                 Json{{"case", opt.case_path},
                      {"forecasts", forecasts},
                      {"realizations", realizations}},
                 Json::array({"report.json", "intervals.csv", "hours.json"}));

  std::printf("hours %d/%d  intervals %ld  realized cost %.6f\n",
              result.report.hours_solved, result.report.hours_total,
              result.report.intervals, result.report.total_cost);
  return result.report.hours_solved == 0 ? kExitInfeasible : kExitOk;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) values.push_back(parse_probability_string(tok));
  }
  if (values.empty()) throw InvalidInput("empty parameter list '" + text + "'");
  return values;
}

int cmd_sweep(const CommonOptions& opt, const std::string& forecasts,
              const std::string& realizations, const std::string& gamma_list,
              const std::string& eps_gen_list, const std::string& eps_line_list) {
  const LoadedCase loaded = load_case(opt.case_path);
  ensure_out_dir(opt.out_dir);
  const bool with_series = !forecasts.empty() && !realizations.empty();
  TimeSeries series;
  if (with_series) series = load_time_series(loaded.grid, forecasts, realizations);

  const std::vector<double> gammas =
      gamma_list.empty() ? std::vector<double>{opt.gamma} : parse_list(gamma_list);
  const std::vector<double> eps_gens = eps_gen_list.empty()
                                           ? std::vector<double>{}
                                           : parse_list(eps_gen_list);
  const std::vector<double> eps_lines = eps_line_list.empty()
                                            ? std::vector<double>{}
                                            : parse_list(eps_line_list);

  std::ofstream table(opt.out_dir + "/sweep.csv");
  if (!table) throw InvalidInput("cannot write sweep.csv");
  table << "gamma,eps_gen,eps_line,status,objective,realized_cost,iterations\n";

  auto run_combo = [&](double gamma, std::optional<double> eg,
                       std::optional<double> el) {
    CommonOptions combo = opt;
    combo.gamma = gamma;
    combo.gamma_mu.reset();
    combo.gamma_sigma.reset();
    StudyParams params = to_params(combo);
    params.eps_gen = eg;
    params.eps_line = el;

    std::string status = "ok";
    double objective = 0, realized = 0;
    int iterations = 0;
    if (with_series) {
      StudyInput input;
      input.grid = &loaded.grid;
      input.uncertainty_mw = loaded.uncertainty_mw;
      input.scenarios = series.scenarios;
      input.realizations = series.realizations;
      const StudyResult result = run_study(input, params, opt.workers);
      realized = result.report.total_cost;
      for (const HourOutcome& h : result.hours) {
        objective += h.feasible ? h.objective : 0.0;
        iterations = std::max(iterations, h.diagnostics.iterations);
      }
      if (result.report.hours_solved == 0) status = "infeasible";
    } else {
      const GridCase hour_case = apply_scenario(loaded.grid, {}, params);
      const auto sens = std::make_shared<const NetworkSensitivities>(
          hour_case, hour_case.monitored_buses());
      const Step1Result r =
          step1_dispatch(hour_case, loaded.uncertainty_mw, params, sens);
      if (!r.feasible) status = "infeasible";
      objective = r.objective;
      iterations = r.diagnostics.iterations;
    }
    table << gamma << ',' << (eg ? std::to_string(*eg) : std::string("case")) << ','
          << (el ? std::to_string(*el) : std::string("case")) << ',' << status << ','
          << std::setprecision(17) << objective << ',' << realized << ','
          << iterations << '\n';
    table.flush();  // partial results survive an interruption
  };

  for (double gamma : gammas) {
    if (eps_gens.empty() && eps_lines.empty()) {
      run_combo(gamma, std::nullopt, std::nullopt);
    } else {
      for (double eg : (eps_gens.empty() ? std::vector<double>{kDefaultGenEps}
                                         : eps_gens)) {
        for (double el : (eps_lines.empty() ? std::vector<double>{kDefaultLineEps}
                                            : eps_lines)) {
          run_combo(gamma, eg, el);
        }
      }
    }
  }

  Json params = params_json(to_params(opt));
  params["gamma_list"] = gamma_list;
  params["eps_gen_list"] = eps_gen_list;
  params["eps_line_list"] = eps_line_list;
  write_manifest(opt.out_dir, "sweep", params,
                 Json{{"case", opt.case_path},
                      {"forecasts", forecasts},
                      {"realizations", realizations}},
                 Json::array({"sweep.csv"}));
  return kExitOk;
}

int cmd_report(const std::string& records_path, int hours_total,
               const std::string& out_dir) {
  const IntervalsFile file = read_intervals_csv(records_path);
  ensure_out_dir(out_dir);
  const int hours = hours_total > 0 ? hours_total : file.hours_total;
  const SimulationReport report =
      aggregate(file.records, hours, file.infeasible_hours);
  write_json(report_to_json(report), out_dir + "/report.json");
  write_manifest(out_dir, "report",
                 Json{{"hours_total", hours}},
                 Json{{"records", records_path}}, Json::array({"report.json"}));
  std::printf("intervals %ld  realized cost %.6f\n", report.intervals,
              report.total_cost);
  return kExitOk;
}

int cmd_synth(Index buses, Index generators, Index wind, unsigned seed, int hours,
              double gamma, double tighten, bool with_hydro,
              const std::string& start, const std::string& out_dir) {
  SynthOptions opt;
  opt.buses = buses;
  opt.generators = generators;
  opt.wind_farms = wind;
  opt.seed = seed;
  opt.gamma = gamma;
  opt.tighten_fraction = tighten;
  opt.with_hydro = with_hydro;
  const SynthCase sc = synth_case(opt);
  ensure_out_dir(out_dir);
  save_case(sc.grid, sc.uncertainty_mw, out_dir + "/case.json");

  if (hours > 0) {
    SynthSeriesOptions sopt;
    sopt.hours = hours;
    sopt.seed = seed + 1;
    const SynthSeries series = synth_series(sc, sopt);
    const auto stamps = hourly_stamps(start, hours);
    save_forecasts_csv(sc.grid, series.scenarios, stamps, out_dir + "/forecasts.csv");
    save_realizations_csv(sc.grid, series.scenarios, series.realizations, stamps,
                          out_dir + "/realizations.csv");
  }
  write_manifest(out_dir, "synth",
                 Json{{"buses", buses},
                      {"generators", generators},
                      {"wind_farms", wind},
                      {"seed", seed},
                      {"hours", hours},
                      {"gamma", gamma},
                      {"tighten_fraction", tighten},
                      {"with_hydro", with_hydro},
                      {"start", start}},
                 Json::object(),
                 hours > 0 ? Json::array({"case.json", "forecasts.csv",
                                          "realizations.csv"})
                           : Json::array({"case.json"}));
  std::printf("wrote %s/case.json (%ld buses, %ld lines)\n", out_dir.c_str(),
              static_cast<long>(sc.grid.bus_count()),
              static_cast<long>(sc.grid.lines.size()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic, chance-constrained and distributionally robust "
               "chance-constrained DC optimal power flow"};
  app.require_subcommand(1);

  CommonOptions solve_opt;
  CLI::App* solve = app.add_subcommand("solve", "dispatch one hour");
  add_common_flags(solve, solve_opt, false);

  CommonOptions sim_opt;
  std::string forecasts, realizations;
  CLI::App* simulate =
      app.add_subcommand("simulate", "hour-ahead dispatch plus 5-minute replay");
  add_common_flags(simulate, sim_opt, true);
  simulate->add_option("--forecasts", forecasts, "hourly forecast CSV")->required();
  simulate->add_option("--realizations", realizations, "5-minute realization CSV")
      ->required();

  CommonOptions sweep_opt;
  std::string sweep_forecasts, sweep_realizations;
  std::string gamma_list, eps_gen_list, eps_line_list;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "grid over gamma and/or epsilon, one table row per combination");
  add_common_flags(sweep, sweep_opt, true);
  sweep->add_option("--forecasts", sweep_forecasts,
                    "hourly forecast CSV (enables realized-cost columns)");
  sweep->add_option("--realizations", sweep_realizations, "5-minute realization CSV");
  sweep->add_option("--gamma-list", gamma_list, "comma-separated budgets");
  sweep->add_option("--eps-gen-list", eps_gen_list, "comma-separated epsilons");
  sweep->add_option("--eps-line-list", eps_line_list, "comma-separated epsilons");

  std::string records_path, report_out = "out";
  int report_hours = 0;
  CLI::App* report = app.add_subcommand("report", "re-aggregate interval records");
  report->add_option("--records", records_path, "intervals.csv from a simulation")
      ->required();
  report->add_option("--hours-total", report_hours, "study hours (0 = infer)");
  report->add_option("--out", report_out, "output directory");

  Index synth_buses = 30, synth_gens = 6, synth_wind = 3;
  unsigned synth_seed = 1;
  int synth_hours = 2;
  double synth_gamma = 0.6, synth_tighten = 0.2;
  bool synth_hydro = false;
  std::string synth_start = "2012-12-01T00:00:00", synth_out = "out";
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic study");
  synth->add_option("--buses", synth_buses);
  synth->add_option("--generators", synth_gens);
  synth->add_option("--wind", synth_wind);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--hours", synth_hours);
  synth->add_option("--gamma", synth_gamma);
  synth->add_option("--tighten", synth_tighten, "fraction of lines squeezed");
  synth->add_flag("--hydro", synth_hydro, "include fixed-output shared-factor units");
  synth->add_option("--start", synth_start, "first forecast timestamp");
  synth->add_option("--out", synth_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(solve_opt);
    if (simulate->parsed()) return cmd_simulate(sim_opt, forecasts, realizations);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_opt, sweep_forecasts, sweep_realizations, gamma_list,
                       eps_gen_list, eps_line_list);
    }
    if (report->parsed()) return cmd_report(records_path, report_hours, report_out);
    if (synth->parsed()) {
      return cmd_synth(synth_buses, synth_gens, synth_wind, synth_seed, synth_hours,
                       synth_gamma, synth_tighten, synth_hydro, synth_start,
                       synth_out);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
