// Acceptance suite: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL] line with its measured numbers. Run without arguments
// for the whole battery or pass criterion names.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rccopf/barrier.hpp"
#include "rccopf/cutting_plane.hpp"
#include "rccopf/simplex.hpp"
#include "rccopf/synth.hpp"
#include "sim_fixture.hpp"

using namespace rccopf;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Affine-response identity: closed-form adjusted angles against a direct
// re-solve of the perturbed balance. 20 random connected cases, 100 draws
// each, max error <= 1e-8 p.u., under 10 s.
bool affine_response_identity(std::string& detail) {
  Timer timer;
  std::mt19937 rng(2001);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0;

  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 10 + 2 * trial;  // 10..48 buses
    SynthOptions opt;
    opt.buses = n;
    opt.generators = 3 + trial % 4;
    opt.wind_farms = 2 + trial % 3;
    opt.seed = 9000 + static_cast<unsigned>(trial);
    const SynthCase sc = synth_case(opt);
    const GridCase& g = sc.grid;
    const Index nw = static_cast<Index>(g.wind_farms.size());
    NetworkSensitivities sens(g, g.monitored_buses());

    Vector alpha_by_bus = Vector::Zero(n);
    for (int k = 0; k < 4; ++k) {
      alpha_by_bus[static_cast<Index>(unif(rng) * static_cast<double>(n))] += unif(rng);
    }
    alpha_by_bus /= alpha_by_bus.sum();

    Vector inj = Vector::NullaryExpr(n, [&](Index) { return normal(rng); });
    inj[0] -= inj.sum();
    const Vector theta = sens.solve_theta(inj);
    const Vector delta = solve_delta(sens, alpha_by_bus);

    for (int draw = 0; draw < 100; ++draw) {
      const Vector omega =
          Vector::NullaryExpr(nw, [&](Index) { return 0.4 * normal(rng); });
      const Vector formula = affine_theta_response(g, sens, theta, delta, omega);
      Vector perturbed = inj - omega.sum() * alpha_by_bus;
      for (Index w = 0; w < nw; ++w) {
        perturbed[g.wind_farms[static_cast<size_t>(w)].bus] += omega[w];
      }
      const Vector direct = sens.solve_theta(perturbed);
      worst = std::max(worst, (formula - direct).cwiseAbs().maxCoeff());
    }
  }
  const double secs = timer.seconds();
  detail = fmt("max |formula - direct| = %.3e p.u. over 20 cases x 100 draws, %.2f s",
               worst, secs);
  return worst <= 1e-8 && secs < 10.0;
}

// ---------------------------------------------------------------------------
// Shared instance pool for the dual-path and gamma-zero criteria: 50 random
// 5-15 bus CC-solvable instances.
struct CcInstance {
  SynthCase sc;
  OpfModel cc_model;
};

std::vector<CcInstance> cc_pool() {
  std::vector<CcInstance> pool;
  pool.reserve(50);  // models point into their cases: no reallocation allowed
  std::mt19937 seed_rng(7777);
  while (pool.size() < 50) {
    SynthOptions opt;
    opt.buses = 5 + static_cast<Index>(pool.size() % 11);  // 5..15
    opt.generators = 3 + static_cast<Index>(pool.size() % 3);
    opt.wind_farms = 2 + static_cast<Index>(pool.size() % 2);
    opt.seed = seed_rng();
    opt.tighten_fraction = 0.35;
    pool.push_back({synth_case(opt), {}});
    CcInstance& inst = pool.back();
    GaussianSpec spec{Vector::Zero(inst.sc.uncertainty_mw.size()),
                      inst.sc.uncertainty_mw.sigma2};
    inst.cc_model = build_cc(inst.sc.grid, spec);
  }
  return pool;
}

// Dual-path oracle: cutting-plane objective vs the direct conic solve,
// relative gap <= 1e-6 on 50 instances, under 2 minutes.
bool dual_path_cc(std::string& detail) {
  Timer timer;
  CuttingPlaneConfig config;
  config.feasibility_tol = 1e-8;
  double worst = 0;
  int solved = 0;
  for (const CcInstance& inst : cc_pool()) {
    const auto cp = solve_cutting_plane(inst.cc_model, config);
    if (cp.master_status != MasterStatus::Optimal || !cp.converged) {
      detail = "cutting plane failed to converge on an instance";
      return false;
    }
    const BarrierOutcome direct = solve_socp_direct(inst.cc_model);
    if (!direct.feasible) {
      detail = "conic path declared a solvable instance infeasible";
      return false;
    }
    ++solved;
    worst = std::max(worst,
                     std::abs(cp.solution.objective - direct.solution.objective) /
                         std::abs(direct.solution.objective));
  }
  const double secs = timer.seconds();
  detail = fmt("max relative gap %.3e over %d instances, %.2f s", worst, solved, secs);
  return worst <= 1e-6 && secs < 120.0;
}

// Gamma = 0 budgets reproduce the nominal CC solution on the same pool.
bool gamma_zero_equivalence(std::string& detail) {
  Timer timer;
  CuttingPlaneConfig config;
  config.feasibility_tol = 1e-8;
  double worst = 0;
  for (const CcInstance& inst : cc_pool()) {
    WindUncertainty u0 = inst.sc.uncertainty_mw;
    u0.gamma_mu = 0.0;
    u0.gamma_sigma = 0.0;
    const auto cc = solve_cutting_plane(inst.cc_model, config);
    const auto rcc = solve_cutting_plane(build_rcc(inst.sc.grid, u0), config);
    if (!cc.converged || !rcc.converged) {
      detail = "a solve failed to converge";
      return false;
    }
    worst = std::max(worst, std::abs(cc.solution.objective - rcc.solution.objective) /
                                std::abs(cc.solution.objective));
  }
  const double secs = timer.seconds();
  detail = fmt("max relative objective gap %.3e over 50 instances, %.2f s", worst, secs);
  return worst <= 1e-6 && secs < 120.0;
}

// ---------------------------------------------------------------------------
// Separation-oracle exactness: greedy values against exhaustive vertex
// enumeration (|W| <= 6) and against a generic LP (|W| = 50).
double brute_force_budget(const Vector& benefit, double budget) {
  const int n = static_cast<int>(benefit.size());
  double best = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double used = 0, value = 0;
    for (int b = 0; b < n; ++b) {
      if (mask & (1 << b)) {
        used += 1.0;
        value += benefit[b];
      }
    }
    if (used > budget + 1e-12) continue;
    best = std::max(best, value);
    const double rem = budget - used;
    if (rem > 0) {
      for (int b = 0; b < n; ++b) {
        if (mask & (1 << b)) continue;
        best = std::max(best, value + std::min(rem, 1.0) * benefit[b]);
      }
    }
  }
  return best;
}

double lp_budget(const Vector& benefit, double budget) {
  const Index n = benefit.size();
  LpProblem p;
  p.objective = -benefit;  // maximize
  p.var_lo = Vector::Zero(n);
  p.var_hi = Vector::Ones(n);
  SparseVector total(n);
  for (Index b = 0; b < n; ++b) total.insert(b) = 1.0;
  p.rows = {total};
  p.row_lo = Vector::Constant(1, -kInf);
  p.row_hi = Vector::Constant(1, budget);
  const LpResult r = solve_lp(p);
  if (r.status != LpStatus::Optimal) return std::nan("");
  return -r.objective;
}

bool separation_oracle_exactness(std::string& detail) {
  Timer timer;
  std::mt19937 rng(31415);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  double worst_small = 0, worst_lp = 0;

  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + static_cast<Index>(unif(rng) * 6);
    WindUncertainty u;
    u.sigma2 = Vector::NullaryExpr(n, [&](Index) { return 0.3 + unif(rng); });
    u.mu_half = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });
    u.sigma2_half = u.sigma2.cwiseProduct(
        Vector::NullaryExpr(n, [&](Index) { return unif(rng); }));
    u.gamma_mu = unif(rng);
    u.gamma_sigma = unif(rng);
    const Vector x = Vector::NullaryExpr(n, [&](Index) { return normal(rng); });
    const Vector q = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });

    const double mean_expected = brute_force_budget(
        u.mu_half.cwiseProduct(x.cwiseAbs()), u.gamma_mu * static_cast<double>(n));
    const double var_expected =
        u.sigma2.dot(q) + brute_force_budget(u.sigma2_half.cwiseProduct(q),
                                             u.gamma_sigma * static_cast<double>(n));
    worst_small =
        std::max(worst_small, std::abs(worst_case_mean(u, x).value - mean_expected));
    worst_small = std::max(
        worst_small, std::abs(worst_case_variance(u, q).value - var_expected));
  }

  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 50;
    WindUncertainty u;
    u.sigma2 = Vector::NullaryExpr(n, [&](Index) { return 0.3 + unif(rng); });
    u.mu_half = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });
    u.sigma2_half = u.sigma2.cwiseProduct(
        Vector::NullaryExpr(n, [&](Index) { return unif(rng); }));
    u.gamma_mu = unif(rng);
    u.gamma_sigma = unif(rng);
    const Vector x = Vector::NullaryExpr(n, [&](Index) { return normal(rng); });
    const Vector q = Vector::NullaryExpr(n, [&](Index) { return unif(rng); });

    const double mean_lp = lp_budget(u.mu_half.cwiseProduct(x.cwiseAbs()),
                                     u.gamma_mu * static_cast<double>(n));
    const double var_lp =
        u.sigma2.dot(q) + lp_budget(u.sigma2_half.cwiseProduct(q),
                                    u.gamma_sigma * static_cast<double>(n));
    worst_lp = std::max(worst_lp, std::abs(worst_case_mean(u, x).value - mean_lp));
    worst_lp = std::max(worst_lp, std::abs(worst_case_variance(u, q).value - var_lp));
  }

  const double secs = timer.seconds();
  detail = fmt("max |greedy - enumeration| %.3e (1000 tuples, |W|<=6), "
               "|greedy - LP| %.3e (100 tuples, |W|=50), %.2f s",
               worst_small, worst_lp, secs);
  return worst_small <= 1e-10 && worst_lp <= 1e-10 && secs < 60.0;
}

// ---------------------------------------------------------------------------
// Monte Carlo chance-constraint validity at the solved dispatch.
struct McCheck {
  double worst_excess = -kInf;  // empirical rate minus (eps + 3 sigma)
  int constraints = 0;
};

// Violations are counted beyond the solver feasibility tolerance the
// dispatch was certified at; boundary-tight constraints otherwise flip on
// 1e-18 roundoff.
McCheck mc_check_constraints(const OpfModel& model, const Vector& x,
                             const std::vector<GaussianSpec>& members,
                             const Matrix& z_draws, double solve_tol) {
  McCheck out;
  const int samples = static_cast<int>(z_draws.cols());
  std::vector<AffineGaussianConstraint> cons = model.line_chance;
  for (const GenChanceConstraint& rec : model.gen_chance) {
    cons.push_back(gen_chance_as_constraint(model, rec));
  }
  for (const AffineGaussianConstraint& c : cons) {
    const Vector coeff = c.omega.eval(x);
    const double det = c.det_lin.dot(x) + c.det_const;
    for (const GaussianSpec& spec : members) {
      const double base = det + coeff.dot(spec.mean);
      const Vector scale = coeff.cwiseProduct(spec.variance.cwiseSqrt());
      const Eigen::RowVectorXd lhs = scale.transpose() * z_draws;
      int violations = 0;
      for (int s = 0; s < samples; ++s) {
        if (base + lhs[s] > c.bound + solve_tol) ++violations;
      }
      const double rate = static_cast<double>(violations) / samples;
      const double bound =
          c.eps + 3.0 * std::sqrt(c.eps * (1.0 - c.eps) / samples);
      out.worst_excess = std::max(out.worst_excess, rate - bound);
    }
    ++out.constraints;
  }
  return out;
}

bool mc_chance_validity(std::string& detail) {
  Timer timer;
  const int samples = 1000000;
  std::mt19937 rng(5150);
  std::normal_distribution<double> normal;

  SynthOptions opt;
  opt.buses = 6;
  opt.generators = 3;
  opt.wind_farms = 3;
  opt.seed = 424242;
  opt.tighten_fraction = 0.5;
  const SynthCase sc = synth_case(opt);
  const Index nw = static_cast<Index>(sc.grid.wind_farms.size());

  Matrix z(nw, samples);
  for (Index b = 0; b < nw; ++b) {
    for (int s = 0; s < samples; ++s) z(b, s) = normal(rng);
  }

  CuttingPlaneConfig config;
  config.feasibility_tol = 1e-8;

  // Nominal CC at the nominal distribution.
  GaussianSpec nominal{Vector::Zero(nw), sc.uncertainty_mw.sigma2 /
                                             (sc.grid.base_mva * sc.grid.base_mva)};
  const OpfModel cc = build_cc(sc.grid, {Vector::Zero(nw), sc.uncertainty_mw.sigma2});
  const auto cc_solved = solve_cutting_plane(cc, config);
  if (!cc_solved.converged) {
    detail = "cc instance failed to solve";
    return false;
  }
  const McCheck cc_check = mc_check_constraints(
      cc, master_point(cc, cc_solved.solution), {nominal}, z,
      config.feasibility_tol);

  // Robust model: every constraint must hold under sampled members of the
  // uncertainty set, including the oracle-certified extremes.
  WindUncertainty u = sc.uncertainty_mw;
  u.gamma_mu = 0.6;
  u.gamma_sigma = 0.6;
  const OpfModel rcc = build_rcc(sc.grid, u);
  const auto rcc_solved = solve_cutting_plane(rcc, config);
  if (!rcc_solved.converged) {
    detail = "rcc instance failed to solve";
    return false;
  }
  const Vector x_rcc = master_point(rcc, rcc_solved.solution);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const WindUncertainty& upu = rcc.uncertainty_pu;
  std::vector<GaussianSpec> members;
  for (int k = 0; k < 100; ++k) {
    Vector t_mu(nw), t_var(nw);
    for (Index b = 0; b < nw; ++b) t_mu[b] = unif(rng);
    for (Index b = 0; b < nw; ++b) t_var[b] = unif(rng);
    const double cap_mu = upu.gamma_mu * static_cast<double>(nw);
    const double cap_var = upu.gamma_sigma * static_cast<double>(nw);
    if (t_mu.sum() > cap_mu) t_mu *= cap_mu / t_mu.sum();
    if (t_var.sum() > cap_var) t_var *= cap_var / t_var.sum();
    GaussianSpec spec;
    spec.mean = Vector(nw);
    spec.variance = Vector(nw);
    for (Index b = 0; b < nw; ++b) {
      spec.mean[b] = (unif(rng) < 0.5 ? -1.0 : 1.0) * t_mu[b] * upu.mu_half[b];
      spec.variance[b] =
          upu.sigma2[b] +
          (unif(rng) < 0.5 ? -1.0 : 1.0) * t_var[b] * upu.sigma2_half[b];
    }
    members.push_back(std::move(spec));
  }
  for (const AffineGaussianConstraint& c : rcc.line_chance) {
    members.push_back(check_robust_feasibility(c, upu, x_rcc).worst);
  }
  const McCheck rcc_check = mc_check_constraints(rcc, x_rcc, members, z,
                                                 config.feasibility_tol);

  const double secs = timer.seconds();
  detail = fmt("worst excess over eps+3sigma: cc %.3e (%d constraints), "
               "rcc %.3e (%d constraints x %zu members), %.1f s",
               cc_check.worst_excess, cc_check.constraints, rcc_check.worst_excess,
               rcc_check.constraints, members.size(), secs);
  return cc_check.worst_excess <= 0 && rcc_check.worst_excess <= 0 && secs < 300.0;
}

// ---------------------------------------------------------------------------
// Objective monotone in the budget on a fixed 30-bus case.
bool gamma_monotonicity(std::string& detail) {
  Timer timer;
  SynthOptions opt;
  opt.buses = 30;
  opt.generators = 6;
  opt.wind_farms = 4;
  opt.seed = 30303;
  opt.tighten_fraction = 0.3;
  const SynthCase sc = synth_case(opt);

  double prev = -kInf;
  double worst_drop = 0;
  std::string objectives;
  for (double gamma : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    WindUncertainty u = sc.uncertainty_mw;
    u.gamma_mu = gamma;
    u.gamma_sigma = gamma;
    const auto out = solve_cutting_plane(build_rcc(sc.grid, u));
    if (!out.converged) {
      detail = fmt("solve at gamma %.1f did not converge", gamma);
      return false;
    }
    const double obj = out.solution.objective;
    if (prev > -kInf) {
      worst_drop = std::max(worst_drop, (prev - obj) / std::abs(obj));
    }
    objectives += fmt(" %.6f", obj);
    prev = obj;
  }
  const double secs = timer.seconds();
  detail = fmt("objectives%s; worst relative drop %.3e, %.2f s", objectives.c_str(),
               worst_drop, secs);
  return worst_drop <= 1e-7;
}

// ---------------------------------------------------------------------------
// Pre-resolved generator rows against the same constraints forced through
// the cutting-plane machinery.
bool special_structure_equivalence(std::string& detail) {
  Timer timer;
  double worst = 0;
  for (unsigned seed : {11u, 22u, 33u, 44u, 55u}) {
    SynthOptions opt;
    opt.buses = 12;
    opt.generators = 4;
    opt.wind_farms = 3;
    opt.seed = seed;
    opt.tighten_fraction = 0.3;
    const SynthCase sc = synth_case(opt);
    WindUncertainty u = sc.uncertainty_mw;
    u.gamma_mu = 0.6;
    u.gamma_sigma = 0.6;
    const OpfModel model = build_rcc(sc.grid, u);

    CuttingPlaneConfig resolved;
    resolved.feasibility_tol = 1e-9;
    CuttingPlaneConfig forced = resolved;
    forced.force_gen_cuts = true;
    forced.max_iterations = 500;

    const auto a = solve_cutting_plane(model, resolved);
    const auto b = solve_cutting_plane(model, forced);
    if (!a.converged || !b.converged) {
      detail = fmt("seed %u failed to converge", seed);
      return false;
    }
    worst = std::max(worst, std::abs(a.solution.objective - b.solution.objective) /
                                std::abs(a.solution.objective));
  }
  const double secs = timer.seconds();
  detail = fmt("max relative objective gap %.3e over 5 instances, %.2f s", worst, secs);
  return worst <= 1e-6;
}

// ---------------------------------------------------------------------------
// Hand-computed replay fixture: exact ACE, flags, overloads and totals.
bool simulation_bookkeeping(std::string& detail) {
  using namespace rccopf::testfixture;
  Timer timer;

  const ReplayHour h0 = hour0();
  const ReplayHour h1 = hour1();
  NetworkSensitivities sens(h0.hour_case, h0.hour_case.monitored_buses());
  auto records = step2_replay(h0.hour_case, sens, h0.p_star, h0.alpha_star, h0.intervals);
  {
    NetworkSensitivities sens1(h1.hour_case, h1.hour_case.monitored_buses());
    const auto more =
        step2_replay(h1.hour_case, sens1, h1.p_star, h1.alpha_star, h1.intervals);
    records.insert(records.end(), more.begin(), more.end());
  }

  bool ok = records.size() == 24;
  // Balanced-response intervals have ACE exactly zero.
  for (int tau = 0; tau < 12 && ok; ++tau) ok = records[static_cast<size_t>(tau)].ace_mw == 0.0;
  // Hour 0 deviations.
  ok = ok && records[10].ace_mw == 0.0 &&
       records[10].ramp_violations == std::vector<int>{0, 1} &&
       records[11].ramp_violations.empty();
  // Hour 1: clipping shows up as ACE, line 1 overloads by 45 MW.
  ok = ok && records[22].ace_mw == 20.0 && records[22].p_mw[1] == 100.0;
  ok = ok && records[23].ace_mw == 55.0 && records[23].p_mw[0] == 0.0 &&
       records[23].overloads == std::vector<int>{1} &&
       std::abs(records[23].overload_mw[1] - 45.0) <= 1e-9;

  const SimulationReport rep = aggregate(records, 2, {});
  const double cost_err = std::abs(rep.total_cost - kExpectedTotalCost);
  ok = ok && cost_err <= 1e-9;
  ok = ok && rep.ramp_violations_by_gen.at(0) == 3 &&
       rep.ramp_violations_by_gen.at(1) == 3 && rep.overloads_by_line.at(1) == 1;

  detail = fmt("24 intervals, C^a %.6f (expected %.6f, err %.1e), %.2f s",
               rep.total_cost, kExpectedTotalCost, cost_err, timer.seconds());
  return ok;
}

// ---------------------------------------------------------------------------
// Scale check: 2000-bus, 170-generator, 24-wind-farm robust instance at the
// full budget converges within 200 rounds and 60 seconds.
bool scale_check(std::string& detail) {
  SynthOptions opt;
  opt.buses = 2000;
  opt.generators = 170;
  opt.wind_farms = 24;
  opt.seed = 20000;
  opt.extra_line_fraction = 0.45;
  opt.tighten_fraction = 0.15;
  const SynthCase sc = synth_case(opt);

  WindUncertainty u = sc.uncertainty_mw;
  u.gamma_mu = 1.0;
  u.gamma_sigma = 1.0;

  Timer timer;
  const OpfModel model = build_rcc(sc.grid, u);
  const auto out = solve_cutting_plane(model);
  const double secs = timer.seconds();

  detail = fmt("%ld buses / %zu lines, %s in %d iterations, %zu cuts, %.1f s",
               static_cast<long>(sc.grid.bus_count()), sc.grid.lines.size(),
               out.diagnostics.termination.c_str(), out.diagnostics.iterations,
               out.cuts.size(), secs);
  return out.converged && out.diagnostics.iterations <= 200 && secs <= 60.0;
}

struct Criterion {
  const char* name;
  bool (*run)(std::string&);
};

constexpr Criterion kCriteria[] = {
    {"affine-response-identity", affine_response_identity},
    {"dual-path-cc", dual_path_cc},
    {"gamma-zero-equivalence", gamma_zero_equivalence},
    {"separation-oracle-exactness", separation_oracle_exactness},
    {"mc-chance-validity", mc_chance_validity},
    {"gamma-monotonicity", gamma_monotonicity},
    {"special-structure-equivalence", special_structure_equivalence},
    {"simulation-bookkeeping", simulation_bookkeeping},
    {"scale-check", scale_check},
};

}  // namespace

int main(int argc, char** argv) {
  int failures = 0;
  int ran = 0;
  for (const Criterion& criterion : kCriteria) {
    if (argc > 1) {
      bool requested = false;
      for (int a = 1; a < argc; ++a) {
        if (criterion.name == std::string(argv[a])) requested = true;
      }
      if (!requested) continue;
    }
    ++ran;
    std::string det;
    bool pass = false;
    try {
      pass = criterion.run(det);
    } catch (const std::exception& e) {
      det = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s - %s\n", pass ? "PASS" : "FAIL", criterion.name,
                det.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matched\n");
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
