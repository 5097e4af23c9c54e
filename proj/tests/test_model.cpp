#include <cmath>
#include <random>

#include "doctest.h"
#include "rccopf/barrier.hpp"
#include "rccopf/cutting_plane.hpp"
#include "rccopf/synth.hpp"

using namespace rccopf;

namespace {

Generator make_gen(int id, int bus, double pmax, double c1, double c2) {
  Generator g;
  g.id = id;
  g.bus = bus;
  g.p_min_mw = 0.0;
  g.p_max_mw = pmax;
  g.ramp_up_mw = pmax;
  g.ramp_down_mw = pmax;
  g.cost_lin = c1;
  g.cost_quad = c2;
  return g;
}

// Single bus carrying one generator and 50 MW of load.
GridCase one_bus_case() {
  GridCase g;
  g.base_mva = 100.0;
  g.buses = {{0, 50.0, true}};
  g.generators = {make_gen(0, 0, 200.0, 10.0, 0.02)};
  return g;
}

// Two-path network where the direct line binds at the optimum.
GridCase binding_line_case() {
  GridCase g;
  g.base_mva = 100.0;
  g.buses = {{0, 0.0, true}, {1, 0.0, false}, {2, 100.0, false}};
  g.lines = {{0, 1, 10.0, 300.0, kDefaultLineEps},
             {1, 2, 10.0, 300.0, kDefaultLineEps},
             {0, 2, 10.0, 50.0, kDefaultLineEps}};
  g.generators = {make_gen(0, 0, 200.0, 10.0, 0.01),
                  make_gen(1, 2, 200.0, 30.0, 0.01)};
  return g;
}

// Symmetric pair of generators off the reference bus, wind at the reference.
GridCase symmetric_cc_case(double sigma = 5.0) {
  GridCase g;
  g.base_mva = 100.0;
  g.buses = {{0, 60.0, true}, {1, 0.0, false}, {2, 0.0, false}};
  g.lines = {{0, 1, 10.0, 400.0, kDefaultLineEps},
             {0, 2, 10.0, 400.0, kDefaultLineEps}};
  g.generators = {make_gen(0, 1, 100.0, 20.0, 0.02),
                  make_gen(1, 2, 100.0, 20.0, 0.02)};
  g.wind_farms = {{0, 20.0}};
  (void)sigma;
  return g;
}

GaussianSpec spec_for(const GridCase& g, double sigma) {
  const Index nw = static_cast<Index>(g.wind_farms.size());
  return {Vector::Zero(nw), Vector::Constant(nw, sigma * sigma)};
}

WindUncertainty uncertainty_for(const GridCase& g, double sigma, double gamma) {
  WindUncertainty u;
  const Index nw = static_cast<Index>(g.wind_farms.size());
  u.sigma2 = Vector::Constant(nw, sigma * sigma);
  u.mu_half = Vector::Constant(nw, 0.4 * sigma);
  u.sigma2_half = Vector::Constant(nw, 0.5 * sigma * sigma);
  u.gamma_mu = gamma;
  u.gamma_sigma = gamma;
  return u;
}

}  // namespace

TEST_CASE("deterministic: balance forces the single generator") {
  const GridCase g = one_bus_case();
  const OpfModel model = build_deterministic(g);
  const auto out = solve_cutting_plane(model);
  REQUIRE(out.converged);
  CHECK(out.diagnostics.iterations == 1);  // nothing to cut
  CHECK(out.solution.p_mw[0] == doctest::Approx(50.0).epsilon(1e-8));
  CHECK(out.solution.objective ==
        doctest::Approx(0.02 * 2500.0 + 10.0 * 50.0).epsilon(1e-8));
}

TEST_CASE("deterministic: identical generators split the load evenly") {
  GridCase g = symmetric_cc_case();
  g.wind_farms.clear();
  const auto out = solve_cutting_plane(build_deterministic(g));
  REQUIRE(out.converged);
  CHECK(out.solution.p_mw[0] == doctest::Approx(30.0).epsilon(1e-7));
  CHECK(out.solution.p_mw[1] == doctest::Approx(30.0).epsilon(1e-7));
}

TEST_CASE("deterministic: congested line binds exactly at its limit") {
  const GridCase g = binding_line_case();
  const auto out = solve_cutting_plane(build_deterministic(g));
  REQUIRE(out.converged);
  // Hand KKT: the direct line carries 2/3 of the cheap unit's injection, so
  // p0 = 75 puts it at the 50 MW limit; the expensive unit covers the rest.
  CHECK(out.solution.p_mw[0] == doctest::Approx(75.0).epsilon(1e-6));
  CHECK(out.solution.p_mw[1] == doctest::Approx(25.0).epsilon(1e-6));
  CHECK(out.solution.flows_mw[2] == doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("deterministic: inverted bounds are an ingestion error") {
  GridCase g = one_bus_case();
  g.generators[0].p_min_mw = 300.0;
  CHECK_THROWS_AS(build_deterministic(g), InvalidInput);
}

TEST_CASE("cc: zero variance collapses to the deterministic dispatch") {
  const GridCase g = symmetric_cc_case();
  const auto det = solve_cutting_plane(build_deterministic(g));
  const auto cc = solve_cutting_plane(build_cc(g, spec_for(g, 0.0)));
  REQUIRE(det.converged);
  REQUIRE(cc.converged);
  CHECK(cc.solution.objective == doctest::Approx(det.solution.objective).epsilon(1e-8));
  CHECK(cc.solution.p_mw[0] == doctest::Approx(det.solution.p_mw[0]).epsilon(1e-6));
  CHECK(cc.solution.alpha.sum() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("cc: symmetric generators share the response evenly") {
  const GridCase g = symmetric_cc_case();
  const auto out = solve_cutting_plane(build_cc(g, spec_for(g, 5.0)));
  REQUIRE(out.converged);
  CHECK(out.solution.alpha[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(out.solution.alpha[1] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(out.solution.alpha.minCoeff() >= -1e-9);
  CHECK(out.solution.p_mw.sum() ==
        doctest::Approx(g.total_demand_mw() - g.total_wind_forecast_mw())
            .epsilon(1e-8));
}

TEST_CASE("cc model structure: constraint counts and layout fixings") {
  const GridCase g = symmetric_cc_case();
  const OpfModel model = build_cc(g, spec_for(g, 5.0));
  CHECK(model.gen_chance.size() == 4 * g.generators.size());
  CHECK(model.line_chance.size() == 2 * g.lines.size());
  CHECK(model.resolved_gen_rows.size() == model.gen_chance.size());
  // Reference-bus fixing: a generator moved to the reference bus loses its
  // participation variable.
  GridCase g2 = g;
  g2.generators[0].bus = 0;
  const OpfModel model2 = build_cc(g2, spec_for(g2, 5.0));
  CHECK(model2.layout.alpha_index[0] == -1);
  CHECK(model2.layout.alpha_fixed[0] == 0.0);
}

TEST_CASE("cc: missing sigma for a wind bus is an error") {
  const GridCase g = symmetric_cc_case();
  GaussianSpec bad{Vector::Zero(0), Vector::Zero(0)};
  CHECK_THROWS_AS(build_cc(g, bad), InvalidInput);
}

TEST_CASE("rcc: gamma 0 reproduces the cc constraint set bit for bit") {
  const GridCase g = binding_line_case();
  GridCase g2 = g;
  g2.wind_farms = {{1, 30.0}};
  const double sigma = 6.0;
  const OpfModel cc = build_cc(g2, spec_for(g2, sigma));
  const OpfModel rcc = build_rcc(g2, uncertainty_for(g2, sigma, 0.0));

  REQUIRE(cc.resolved_gen_rows.size() == rcc.resolved_gen_rows.size());
  for (size_t k = 0; k < cc.resolved_gen_rows.size(); ++k) {
    const auto& a = cc.resolved_gen_rows[k];
    const auto& b = rcc.resolved_gen_rows[k];
    CHECK(Vector(a.coeffs) == Vector(b.coeffs));
    CHECK(a.hi == b.hi);
  }
  REQUIRE(cc.line_chance.size() == rcc.line_chance.size());
  for (size_t k = 0; k < cc.line_chance.size(); ++k) {
    CHECK(Vector(cc.line_chance[k].det_lin) == Vector(rcc.line_chance[k].det_lin));
    CHECK(cc.line_chance[k].det_const == rcc.line_chance[k].det_const);
    CHECK(cc.line_chance[k].bound == rcc.line_chance[k].bound);
    CHECK(cc.line_chance[k].omega.offset == rcc.line_chance[k].omega.offset);
  }
  CHECK(cc.var_omega_pu == rcc.var_omega_pu);
}

TEST_CASE("rcc: degenerate intervals make every budget equal to cc") {
  const GridCase g = symmetric_cc_case();
  const double sigma = 5.0;
  WindUncertainty u = uncertainty_for(g, sigma, 0.7);
  u.mu_half.setZero();
  u.sigma2_half.setZero();
  const auto cc = solve_cutting_plane(build_cc(g, spec_for(g, sigma)));
  const auto rcc = solve_cutting_plane(build_rcc(g, u));
  REQUIRE(cc.converged);
  REQUIRE(rcc.converged);
  CHECK(rcc.solution.objective ==
        doctest::Approx(cc.solution.objective).epsilon(1e-9));
}

TEST_CASE("rcc: full-budget single generator bound matches the closed form") {
  // One dispatchable generator off-reference carrying all response.
  GridCase g;
  g.base_mva = 100.0;
  g.buses = {{0, 0.0, true}, {1, 80.0, false}};
  g.lines = {{0, 1, 10.0, 500.0, kDefaultLineEps}};
  g.generators = {make_gen(0, 1, 150.0, 20.0, 0.01)};
  g.wind_farms = {{1, 30.0}};
  WindUncertainty u = uncertainty_for(g, 8.0, 1.0);

  const OpfModel model = build_rcc(g, u);
  // Find the pmax row: p + alpha (-minMean + kappa sqrt(maxVar)) <= pmax.
  const double kappa = inv_norm_cdf(1.0 - kDefaultGenEps);
  const double min_mean = -u.mu_half.sum() / g.base_mva;
  const double max_var = (u.sigma2.sum() + u.sigma2_half.sum()) /
                         (g.base_mva * g.base_mva);
  const auto& row = model.resolved_gen_rows[0];
  REQUIRE(row.label == "gen 0 pmax");
  const Vector coeffs = Vector(row.coeffs);
  CHECK(coeffs[model.layout.p_index[0]] == doctest::Approx(1.0));
  CHECK(coeffs[model.layout.alpha_index[0]] ==
        doctest::Approx(-min_mean + kappa * std::sqrt(max_var)).epsilon(1e-12));
  CHECK(row.hi == doctest::Approx(150.0 / g.base_mva));
}

TEST_CASE("solver: dual-path cc oracle on toy cases") {
  std::mt19937 seed_rng(3);
  int solved = 0;
  for (int trial = 0; trial < 8; ++trial) {
    SynthOptions opt;
    opt.buses = 5 + 2 * trial;
    opt.generators = 3 + trial / 2;
    opt.wind_farms = 2;
    opt.seed = seed_rng();
    const SynthCase sc = synth_case(opt);
    GaussianSpec spec{Vector::Zero(sc.uncertainty_mw.size()), sc.uncertainty_mw.sigma2};
    const OpfModel model = build_cc(sc.grid, spec);

    CuttingPlaneConfig config;
    config.feasibility_tol = 1e-8;
    const auto cp = solve_cutting_plane(model, config);
    if (cp.master_status != MasterStatus::Optimal) continue;
    REQUIRE(cp.converged);

    const BarrierOutcome direct = solve_socp_direct(model);
    REQUIRE(direct.feasible);
    ++solved;
    CHECK(std::abs(cp.solution.objective - direct.solution.objective) <=
          1e-6 * std::abs(direct.solution.objective));
  }
  CHECK(solved >= 6);
}

TEST_CASE("solver: socp direct on unconstrained toys") {
  // With limits far from binding the conic route decouples: dispatch equals
  // the deterministic one and the response splits by inverse quadratic cost.
  GridCase g = symmetric_cc_case();
  for (Line& l : g.lines) l.capacity_mw = 1e5;
  for (Generator& gen : g.generators) {
    gen.p_max_mw = 1e4;
    gen.ramp_up_mw = gen.ramp_down_mw = 1e4;
  }
  g.generators[1].cost_quad = 0.04;  // asymmetric response split 2:1

  const double sigma = 5.0;
  const auto det = solve_cutting_plane(build_deterministic(g));
  const OpfModel cc = build_cc(g, spec_for(g, sigma));
  const BarrierOutcome direct = solve_socp_direct(cc);
  REQUIRE(det.converged);
  REQUIRE(direct.feasible);

  const double var_mw = sigma * sigma;
  // min sum c2_i alpha_i^2 s.t. sum alpha = 1: alpha_i ~ 1/c2_i.
  const double inv_sum = 1.0 / 0.02 + 1.0 / 0.04;
  const double var_floor = var_mw / inv_sum;
  CHECK(direct.solution.objective ==
        doctest::Approx(det.solution.objective + var_floor).epsilon(1e-7));
  CHECK(direct.solution.alpha[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(direct.solution.alpha[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

  SUBCASE("symmetric costs split the response evenly") {
    GridCase g2 = symmetric_cc_case();
    for (Line& l : g2.lines) l.capacity_mw = 1e5;
    const BarrierOutcome sym = solve_socp_direct(build_cc(g2, spec_for(g2, sigma)));
    REQUIRE(sym.feasible);
    CHECK(sym.solution.alpha[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sym.solution.alpha[1] == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("solver: socp direct rejects robust models") {
  const GridCase g = symmetric_cc_case();
  const OpfModel model = build_rcc(g, uncertainty_for(g, 5.0, 0.5));
  CHECK_THROWS_AS(solve_socp_direct(model), InvalidInput);
}

TEST_CASE("solver: rcc gamma 0 equals cc through the cutting plane") {
  std::mt19937 seed_rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    SynthOptions opt;
    opt.buses = 6 + 3 * trial;
    opt.generators = 3;
    opt.wind_farms = 2;
    opt.seed = seed_rng();
    const SynthCase sc = synth_case(opt);

    GaussianSpec spec{Vector::Zero(sc.uncertainty_mw.size()), sc.uncertainty_mw.sigma2};
    WindUncertainty u0 = sc.uncertainty_mw;
    u0.gamma_mu = 0.0;
    u0.gamma_sigma = 0.0;

    CuttingPlaneConfig config;
    config.feasibility_tol = 1e-8;
    const auto cc = solve_cutting_plane(build_cc(sc.grid, spec), config);
    const auto rcc = solve_cutting_plane(build_rcc(sc.grid, u0), config);
    if (cc.master_status != MasterStatus::Optimal) continue;
    REQUIRE(rcc.master_status == MasterStatus::Optimal);
    CHECK(std::abs(cc.solution.objective - rcc.solution.objective) <=
          1e-6 * (1.0 + std::abs(cc.solution.objective)));
  }
}

TEST_CASE("solver: master objective sequence is nondecreasing; cuts stay valid") {
  SynthOptions opt;
  opt.buses = 12;
  opt.generators = 4;
  opt.wind_farms = 3;
  opt.seed = 99;
  opt.gamma = 0.8;
  opt.tighten_fraction = 0.5;
  const SynthCase sc = synth_case(opt);
  const OpfModel model = build_rcc(sc.grid, sc.uncertainty_mw);
  const auto out = solve_cutting_plane(model);
  REQUIRE(out.converged);

  const auto& seq = out.diagnostics.objective_sequence;
  for (size_t k = 1; k < seq.size(); ++k) {
    CHECK(seq[k] >= seq[k - 1] - 1e-9 * (1.0 + std::abs(seq[k])));
  }

  // Idempotence: separating at the returned solution adds nothing.
  Vector x(model.layout.n_vars);
  for (size_t i = 0; i < sc.grid.generators.size(); ++i) {
    if (model.layout.p_index[i] >= 0) {
      x[model.layout.p_index[i]] = out.solution.p_mw[static_cast<Index>(i)] / sc.grid.base_mva;
    }
    if (model.layout.alpha_index[i] >= 0) {
      x[model.layout.alpha_index[i]] = out.solution.alpha[static_cast<Index>(i)];
    }
  }
  const auto sep = separation_round(model, x, 1e-6);
  CHECK(sep.cuts.empty());

  // Cut validity at sampled feasible points of the true problem.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index ng = static_cast<Index>(sc.grid.generators.size());
  int feasible_points = 0;
  for (int s = 0; s < 10000 && feasible_points < 200; ++s) {
    Vector cand = x;
    // Random alpha on the simplex, random p near the solution, rebalanced.
    Vector alpha(ng);
    for (Index i = 0; i < ng; ++i) alpha[i] = -std::log(unif(rng) + 1e-12);
    alpha /= alpha.sum();
    for (Index i = 0; i < ng; ++i) {
      if (model.layout.alpha_index[i] >= 0) cand[model.layout.alpha_index[i]] = alpha[i];
    }
    Vector dp = Vector::Zero(ng);
    for (Index i = 0; i < ng; ++i) dp[i] = 6.0 * (unif(rng) - 0.5) / sc.grid.base_mva;
    dp.array() -= dp.mean();  // keep the balance row satisfied
    bool in_box = true;
    for (Index i = 0; i < ng; ++i) {
      const int j = model.layout.p_index[i];
      if (j < 0) continue;
      cand[j] = x[j] + dp[i];
      const Generator& gen = sc.grid.generators[static_cast<size_t>(i)];
      if (cand[j] < gen.p_min_mw / 100.0 || cand[j] > gen.p_max_mw / 100.0) in_box = false;
    }
    if (!in_box) continue;
    if (separation_round(model, cand, 1e-9).max_violation > 0) continue;
    ++feasible_points;
    for (const SocCut& cut : out.cuts) {
      CHECK(cut.coeffs.dot(cand) <= cut.rhs + 1e-8);
    }
  }
  CHECK(feasible_points > 30);
}

TEST_CASE("solver: special-structure rows equal the forced cutting-plane path") {
  std::mt19937 seed_rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    SynthOptions opt;
    opt.buses = 8 + trial * 3;
    opt.generators = 3;
    opt.wind_farms = 2;
    opt.seed = seed_rng();
    opt.gamma = 0.6;
    const SynthCase sc = synth_case(opt);
    const OpfModel model = build_rcc(sc.grid, sc.uncertainty_mw);

    CuttingPlaneConfig resolved;
    resolved.feasibility_tol = 1e-9;
    CuttingPlaneConfig forced = resolved;
    forced.force_gen_cuts = true;
    forced.max_iterations = 400;

    const auto a = solve_cutting_plane(model, resolved);
    const auto b = solve_cutting_plane(model, forced);
    REQUIRE(a.master_status == MasterStatus::Optimal);
    REQUIRE(b.master_status == MasterStatus::Optimal);
    CHECK(std::abs(a.solution.objective - b.solution.objective) <=
          1e-6 * (1.0 + std::abs(a.solution.objective)));
  }
}

TEST_CASE("solver: lp master fallback approximates the qp master") {
  const GridCase g = binding_line_case();
  CuttingPlaneConfig lp_config;
  lp_config.master_backend = "lp";
  lp_config.pwl_segments = 60;
  const auto qp = solve_cutting_plane(build_deterministic(g));
  const auto lp = solve_cutting_plane(build_deterministic(g), lp_config);
  REQUIRE(qp.converged);
  REQUIRE(lp.converged);
  // The piecewise-linear objective under-estimates within its sampling gap.
  CHECK(std::abs(lp.solution.objective - qp.solution.objective) <=
        5e-3 * std::abs(qp.solution.objective));
  CHECK(lp.solution.p_mw[0] == doctest::Approx(qp.solution.p_mw[0]).epsilon(0.02));
}

TEST_CASE("solver: lp master carries cutting planes too") {
  const GridCase g = symmetric_cc_case();
  CuttingPlaneConfig lp_config;
  lp_config.master_backend = "lp";
  lp_config.pwl_segments = 80;
  const auto qp = solve_cutting_plane(build_cc(g, spec_for(g, 5.0)));
  const auto lp = solve_cutting_plane(build_cc(g, spec_for(g, 5.0)), lp_config);
  REQUIRE(qp.converged);
  REQUIRE(lp.converged);
  CHECK(std::abs(lp.solution.objective - qp.solution.objective) <=
        5e-3 * std::abs(qp.solution.objective));
}

TEST_CASE("solver: master infeasibility is propagated") {
  GridCase g = one_bus_case();
  g.buses[0].demand_mw = 500.0;  // beyond the single unit's capacity
  const auto out = solve_cutting_plane(build_deterministic(g));
  CHECK(out.master_status == MasterStatus::Infeasible);
  CHECK(out.diagnostics.termination == "master-infeasible");
  CHECK_FALSE(out.converged);
}

TEST_CASE("objective is nondecreasing in gamma") {
  SynthOptions opt;
  opt.buses = 14;
  opt.generators = 4;
  opt.wind_farms = 3;
  opt.seed = 12345;
  const SynthCase sc = synth_case(opt);
  double prev = -kInf;
  for (double gamma : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    WindUncertainty u = sc.uncertainty_mw;
    u.gamma_mu = gamma;
    u.gamma_sigma = gamma;
    const auto out = solve_cutting_plane(build_rcc(sc.grid, u));
    REQUIRE(out.converged);
    CHECK(out.solution.objective >=
          prev - 1e-7 * (1.0 + std::abs(out.solution.objective)));
    prev = out.solution.objective;
  }
}

TEST_CASE("expected cost identity: monte carlo matches the objective") {
  const GridCase g = symmetric_cc_case();
  const double sigma = 5.0;
  const OpfModel model = build_cc(g, spec_for(g, sigma));
  const auto out = solve_cutting_plane(model);
  REQUIRE(out.converged);

  std::mt19937 rng(777);
  std::normal_distribution<double> normal(0.0, sigma);
  const int draws = 100000;
  double total = 0;
  for (int s = 0; s < draws; ++s) {
    const double omega = normal(rng);
    double cost = 0;
    for (size_t i = 0; i < g.generators.size(); ++i) {
      const double p = out.solution.p_mw[static_cast<Index>(i)] -
                       out.solution.alpha[static_cast<Index>(i)] * omega;
      cost += g.generators[i].cost_quad * p * p + g.generators[i].cost_lin * p;
    }
    total += cost;
  }
  const double mc = total / draws;
  CHECK(std::abs(mc - out.solution.objective) <= 5e-3 * out.solution.objective);
}

TEST_CASE("cc with hydro-style shared participation") {
  SynthOptions opt;
  opt.buses = 10;
  opt.generators = 5;
  opt.wind_farms = 2;
  opt.seed = 2718;
  opt.with_hydro = true;
  const SynthCase sc = synth_case(opt);
  GaussianSpec spec{Vector::Zero(sc.uncertainty_mw.size()), sc.uncertainty_mw.sigma2};
  const OpfModel model = build_cc(sc.grid, spec);
  REQUIRE(model.layout.shared_alpha >= 0);

  const auto out = solve_cutting_plane(model);
  REQUIRE(out.converged);
  // Fixed-output units hold their dispatch and share one factor.
  double shared_value = -1;
  for (size_t i = 0; i < sc.grid.generators.size(); ++i) {
    const Generator& gen = sc.grid.generators[i];
    if (gen.dispatchable) continue;
    CHECK(out.solution.p_mw[static_cast<Index>(i)] ==
          doctest::Approx(gen.fixed_output_mw));
    if (shared_value < 0) shared_value = out.solution.alpha[static_cast<Index>(i)];
    CHECK(out.solution.alpha[static_cast<Index>(i)] == doctest::Approx(shared_value));
  }
  CHECK(out.solution.alpha.sum() == doctest::Approx(1.0).epsilon(1e-8));
}
