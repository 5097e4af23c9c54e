#include "rccopf/model.hpp"

#include <cmath>

namespace rccopf {

namespace {

SparseVector to_sparse(const Vector& dense) {
  SparseVector out(dense.size());
  for (Index i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) out.insert(i) = dense[i];
  }
  return out;
}

struct Builder {
  const GridCase& grid;
  OpfModel model;
  double base;

  Builder(const GridCase& grid_in, OpfMode mode,
          std::shared_ptr<const NetworkSensitivities> sens)
      : grid(grid_in), base(grid_in.base_mva) {
    grid.validate();
    model.mode = mode;
    model.grid = &grid;
    model.monitored = grid.effective_monitored_lines();
    model.sens = sens ? std::move(sens)
                      : std::make_shared<const NetworkSensitivities>(
                            grid, grid.monitored_buses());
  }

  bool with_alpha() const { return model.mode != OpfMode::Deterministic; }

  void build_layout() {
    const int ref = grid.reference_bus();
    const size_t ng = grid.generators.size();
    auto& lay = model.layout;
    lay.p_index.assign(ng, -1);
    lay.p_fixed_pu.assign(ng, 0.0);
    lay.alpha_index.assign(ng, -1);
    lay.alpha_fixed.assign(ng, 0.0);
    lay.in_service.assign(ng, 0);

    Index next = 0;
    for (size_t i = 0; i < ng; ++i) {
      const Generator& g = grid.generators[i];
      if (!g.in_service) continue;
      lay.in_service[i] = 1;
      if (g.dispatchable) {
        lay.p_index[i] = static_cast<int>(next++);
      } else {
        lay.p_fixed_pu[i] = g.fixed_output_mw / base;
      }
    }
    if (with_alpha()) {
      int shared = -1;
      for (size_t i = 0; i < ng; ++i) {
        const Generator& g = grid.generators[i];
        if (!lay.in_service[i]) continue;
        if (g.bus == ref) {
          // Participation at the reference bus is pinned to zero.
          if (g.alpha_policy == AlphaPolicy::Fixed && g.alpha_value != 0.0) {
            throw InvalidInput("generator " + std::to_string(g.id) +
                               " sits at the reference bus; its participation "
                               "factor must be zero");
          }
          continue;
        }
        switch (g.alpha_policy) {
          case AlphaPolicy::Variable:
            lay.alpha_index[i] = static_cast<int>(next++);
            break;
          case AlphaPolicy::Fixed:
            lay.alpha_fixed[i] = g.alpha_value;
            break;
          case AlphaPolicy::Shared:
            if (shared < 0) shared = static_cast<int>(next++);
            lay.alpha_index[i] = shared;
            break;
        }
      }
      lay.shared_alpha = shared;
    }
    lay.n_vars = next;
  }

  void build_objective() {
    const auto& lay = model.layout;
    model.obj_quad = Vector::Zero(lay.n_vars);
    model.obj_lin = Vector::Zero(lay.n_vars);
    model.obj_const = 0;
    const double var_mw = model.var_omega_pu * base * base;

    for (size_t i = 0; i < grid.generators.size(); ++i) {
      if (!lay.in_service[i]) continue;
      const Generator& g = grid.generators[i];
      if (lay.p_index[i] >= 0) {
        model.obj_quad[lay.p_index[i]] += g.cost_quad * base * base;
        model.obj_lin[lay.p_index[i]] += g.cost_lin * base;
      } else {
        const double pmw = lay.p_fixed_pu[i] * base;
        model.obj_const += g.cost_quad * pmw * pmw + g.cost_lin * pmw;
      }
      if (with_alpha()) {
        if (lay.alpha_index[i] >= 0) {
          model.obj_quad[lay.alpha_index[i]] += g.cost_quad * var_mw;
        } else {
          model.obj_const +=
              g.cost_quad * var_mw * lay.alpha_fixed[i] * lay.alpha_fixed[i];
        }
      }
    }
  }

  void add_balance_and_bounds() {
    const auto& lay = model.layout;
    Vector balance = Vector::Zero(lay.n_vars);
    double fixed_injection = 0;
    for (size_t i = 0; i < grid.generators.size(); ++i) {
      if (!lay.in_service[i]) continue;
      if (lay.p_index[i] >= 0) balance[lay.p_index[i]] = 1.0;
      else fixed_injection += lay.p_fixed_pu[i];
    }
    const double rhs =
        (grid.total_demand_mw() - grid.total_wind_forecast_mw()) / base -
        fixed_injection;
    model.equalities.push_back({to_sparse(balance), rhs, rhs, "power balance"});

    if (with_alpha()) {
      Vector total = Vector::Zero(lay.n_vars);
      double fixed_alpha = 0;
      for (size_t i = 0; i < grid.generators.size(); ++i) {
        if (!lay.in_service[i]) continue;
        if (lay.alpha_index[i] >= 0) total[lay.alpha_index[i]] += 1.0;
        else fixed_alpha += lay.alpha_fixed[i];
      }
      const double target = 1.0 - fixed_alpha;
      model.equalities.push_back(
          {to_sparse(total), target, target, "participation total"});
    }

    for (size_t i = 0; i < grid.generators.size(); ++i) {
      if (!lay.in_service[i]) continue;
      const Generator& g = grid.generators[i];
      if (lay.p_index[i] >= 0) {
        SparseVector unit(lay.n_vars);
        unit.insert(lay.p_index[i]) = 1.0;
        model.inequalities.push_back({std::move(unit), g.p_min_mw / base,
                                      g.p_max_mw / base,
                                      "p bounds gen " + std::to_string(g.id)});
      }
    }
    if (with_alpha()) {
      std::vector<char> seen(static_cast<size_t>(lay.n_vars), 0);
      for (size_t i = 0; i < grid.generators.size(); ++i) {
        const int j = lay.alpha_index[i];
        if (j < 0 || seen[static_cast<size_t>(j)]) continue;
        seen[static_cast<size_t>(j)] = 1;
        SparseVector unit(lay.n_vars);
        unit.insert(j) = 1.0;
        model.inequalities.push_back(
            {std::move(unit), 0.0, kInf,
             "alpha nonnegative gen " + std::to_string(grid.generators[i].id)});
      }
    }
  }

  // Per-bus constant injection: wind forecast minus demand plus fixed
  // generation, per-unit.
  Vector fixed_bus_injection() const {
    Vector inj = Vector::Zero(grid.bus_count());
    for (const Bus& b : grid.buses) inj[b.id] -= b.demand_mw / base;
    for (const WindFarm& w : grid.wind_farms) inj[w.bus] += w.forecast_mw / base;
    const auto& lay = model.layout;
    for (size_t i = 0; i < grid.generators.size(); ++i) {
      if (!lay.in_service[i] || lay.p_index[i] >= 0) continue;
      inj[grid.generators[i].bus] += lay.p_fixed_pu[i];
    }
    return inj;
  }

  void add_line_rows(bool with_chance) {
    const auto& lay = model.layout;
    const Vector fixed_inj = fixed_bus_injection();
    const Index nw = static_cast<Index>(grid.wind_farms.size());

    for (int li : model.monitored) {
      const Line& line = grid.lines[static_cast<size_t>(li)];
      const Vector ptdf = line.susceptance * (model.sens->pi_row(line.from) -
                                              model.sens->pi_row(line.to));
      const double fmax = line.capacity_mw / base;

      // Forecast flow as an affine function of the p variables.
      Vector det = Vector::Zero(lay.n_vars);
      double det_const = ptdf.dot(fixed_inj);
      for (size_t i = 0; i < grid.generators.size(); ++i) {
        if (!lay.in_service[i] || lay.p_index[i] < 0) continue;
        det[lay.p_index[i]] += ptdf[grid.generators[i].bus];
      }

      const std::string name =
          "line " + std::to_string(li) + " (" + std::to_string(line.from) + "," +
          std::to_string(line.to) + ")";
      model.inequalities.push_back({to_sparse(det), -fmax - det_const,
                                    fmax - det_const, name + " forecast flow"});

      if (!with_chance) continue;

      // Deviation coefficients: the per-bus term is the PTDF entry at the
      // wind bus; the response term is shared across buses and linear in the
      // participation variables.
      Vector shared = Vector::Zero(lay.n_vars);
      double fixed_shift = 0;
      for (size_t i = 0; i < grid.generators.size(); ++i) {
        if (!lay.in_service[i]) continue;
        const double w = ptdf[grid.generators[i].bus];
        if (lay.alpha_index[i] >= 0) shared[lay.alpha_index[i]] -= w;
        else fixed_shift -= w * lay.alpha_fixed[i];
      }
      Vector offset(nw);
      for (Index w = 0; w < nw; ++w) {
        offset[w] = ptdf[grid.wind_farms[static_cast<size_t>(w)].bus] + fixed_shift;
      }

      AffineGaussianConstraint upper;
      upper.det_lin = to_sparse(det);
      upper.det_const = det_const;
      upper.omega.offset = offset;
      upper.omega.shared = to_sparse(shared);
      upper.bound = fmax;
      upper.eps = line.eps;
      upper.label = name + " upper";
      model.line_chance.push_back(upper);

      AffineGaussianConstraint lower;
      lower.det_lin = to_sparse(Vector(-det));
      lower.det_const = -det_const;
      lower.omega.offset = -offset;
      lower.omega.shared = to_sparse(Vector(-shared));
      lower.bound = fmax;
      lower.eps = line.eps;
      lower.label = name + " lower";
      model.line_chance.push_back(lower);
    }
  }

  void add_gen_chance() {
    for (size_t i = 0; i < grid.generators.size(); ++i) {
      if (!model.layout.in_service[i]) continue;
      const Generator& g = grid.generators[i];
      for (GenChanceKind kind :
           {GenChanceKind::MaxOutput, GenChanceKind::MinOutput,
            GenChanceKind::RampUp, GenChanceKind::RampDown}) {
        model.gen_chance.push_back({static_cast<int>(i), kind, g.eps});
      }
    }
  }

  // Resolves every generator-side record to its single linear row. For the
  // nominal model the total-deviation parameters are the nominal ones; in
  // robust mode they are the worst cases, which do not depend on alpha.
  void resolve_gen_rows() {
    double mean_low, mean_high, std_dev;
    if (model.mode == OpfMode::Robust) {
      const auto bounds = worst_case_scalar_omega(model.uncertainty_pu);
      mean_low = bounds.min_total_mean;
      mean_high = -bounds.min_total_mean;  // U_mu is symmetric
      std_dev = std::sqrt(std::max(bounds.max_total_variance, 0.0));
    } else {
      mean_low = mean_high = model.nominal_pu.total_mean();
      std_dev = std::sqrt(std::max(model.nominal_pu.total_variance(), 0.0));
    }

    const auto& lay = model.layout;
    for (const GenChanceConstraint& rec : model.gen_chance) {
      const Generator& g = grid.generators[static_cast<size_t>(rec.gen)];
      const double kappa = inv_norm_cdf(1.0 - rec.eps);
      Vector row = Vector::Zero(lay.n_vars);
      double constant = 0;
      double bound = 0;
      std::string label = "gen " + std::to_string(g.id);

      const auto add_p = [&](double sign) {
        if (lay.p_index[rec.gen] >= 0) row[lay.p_index[rec.gen]] += sign;
        else constant += sign * lay.p_fixed_pu[rec.gen];
      };
      const auto add_alpha = [&](double coeff) {
        if (lay.alpha_index[rec.gen] >= 0) row[lay.alpha_index[rec.gen]] += coeff;
        else constant += coeff * lay.alpha_fixed[rec.gen];
      };

      switch (rec.kind) {
        case GenChanceKind::MaxOutput:
          add_p(1.0);
          add_alpha(-mean_low + kappa * std_dev);
          bound = g.p_max_mw / base;
          label += " pmax";
          break;
        case GenChanceKind::MinOutput:
          add_p(-1.0);
          add_alpha(mean_high + kappa * std_dev);
          bound = -g.p_min_mw / base;
          label += " pmin";
          break;
        case GenChanceKind::RampUp:
          add_alpha(-mean_low + kappa * std_dev);
          bound = g.ramp_up_mw / base;
          label += " ramp up";
          break;
        case GenChanceKind::RampDown:
          add_alpha(mean_high + kappa * std_dev);
          bound = g.ramp_down_mw / base;
          label += " ramp down";
          break;
      }
      model.resolved_gen_rows.push_back(
          {to_sparse(row), -kInf, bound - constant, label});
    }
  }

  void finish_stochastic(const GaussianSpec& spec_mw) {
    if (spec_mw.size() != static_cast<Index>(grid.wind_farms.size())) {
      throw InvalidInput("deviation model must cover every wind farm: expected " +
                         std::to_string(grid.wind_farms.size()) + " entries, got " +
                         std::to_string(spec_mw.size()));
    }
    for (Index b = 0; b < spec_mw.size(); ++b) {
      if (spec_mw.variance[b] < 0) {
        throw InvalidInput("negative variance for wind farm " + std::to_string(b));
      }
    }
    model.nominal_pu = {spec_mw.mean / base,
                        spec_mw.variance / (base * base)};
  }
};

}  // namespace

OpfModel build_deterministic(const GridCase& grid,
                             std::shared_ptr<const NetworkSensitivities> sens) {
  Builder b(grid, OpfMode::Deterministic, std::move(sens));
  b.build_layout();
  b.build_objective();
  b.add_balance_and_bounds();
  b.add_line_rows(false);
  return std::move(b.model);
}

OpfModel build_cc(const GridCase& grid, const GaussianSpec& spec_mw,
                  std::shared_ptr<const NetworkSensitivities> sens) {
  Builder b(grid, OpfMode::NominalCc, std::move(sens));
  b.finish_stochastic(spec_mw);
  b.model.var_omega_pu = b.model.nominal_pu.total_variance();
  b.build_layout();
  b.build_objective();
  b.add_balance_and_bounds();
  b.add_line_rows(true);
  b.add_gen_chance();
  b.resolve_gen_rows();
  return std::move(b.model);
}

OpfModel build_rcc(const GridCase& grid, const WindUncertainty& u_mw,
                   std::shared_ptr<const NetworkSensitivities> sens,
                   const BuildOptions& options) {
  u_mw.validate();
  if (u_mw.size() != static_cast<Index>(grid.wind_farms.size())) {
    throw InvalidInput("uncertainty set must cover every wind farm");
  }
  Builder b(grid, OpfMode::Robust, std::move(sens));
  b.finish_stochastic({Vector::Zero(u_mw.size()), u_mw.sigma2});
  b.model.uncertainty_pu = u_mw;
  b.model.uncertainty_pu.sigma2 = u_mw.sigma2 / (b.base * b.base);
  b.model.uncertainty_pu.mu_half = u_mw.mu_half / b.base;
  b.model.uncertainty_pu.sigma2_half = u_mw.sigma2_half / (b.base * b.base);

  // The objective keeps the nominal var(Omega) unless explicitly robustified.
  b.model.var_omega_pu =
      options.robust_objective_variance
          ? worst_case_scalar_omega(b.model.uncertainty_pu).max_total_variance
          : b.model.nominal_pu.total_variance();

  b.build_layout();
  b.build_objective();
  b.add_balance_and_bounds();
  b.add_line_rows(true);
  b.add_gen_chance();
  b.resolve_gen_rows();
  return std::move(b.model);
}

AffineGaussianConstraint gen_chance_as_constraint(const OpfModel& model,
                                                  const GenChanceConstraint& rec) {
  const GridCase& grid = *model.grid;
  const Generator& g = grid.generators[static_cast<size_t>(rec.gen)];
  const auto& lay = model.layout;
  const double base = grid.base_mva;
  const Index nw = static_cast<Index>(grid.wind_farms.size());

  AffineGaussianConstraint c;
  c.det_lin = SparseVector(lay.n_vars);
  c.eps = rec.eps;
  c.omega.offset = Vector::Zero(nw);
  c.omega.shared = SparseVector(lay.n_vars);
  c.label = "gen " + std::to_string(g.id);

  double det_const = 0;
  const auto add_p = [&](double sign) {
    if (lay.p_index[rec.gen] >= 0) c.det_lin.insert(lay.p_index[rec.gen]) = sign;
    else det_const += sign * lay.p_fixed_pu[rec.gen];
  };
  // Coefficient of every omega_b is `sign * alpha_i`.
  const auto set_alpha_coeff = [&](double sign) {
    if (lay.alpha_index[rec.gen] >= 0) {
      c.omega.shared.insert(lay.alpha_index[rec.gen]) = sign;
    } else {
      c.omega.offset.setConstant(sign * lay.alpha_fixed[rec.gen]);
    }
  };

  switch (rec.kind) {
    case GenChanceKind::MaxOutput:
      add_p(1.0);
      set_alpha_coeff(-1.0);
      c.bound = g.p_max_mw / base - det_const;
      c.label += " pmax";
      break;
    case GenChanceKind::MinOutput:
      add_p(-1.0);
      set_alpha_coeff(1.0);
      c.bound = -g.p_min_mw / base - det_const;
      c.label += " pmin";
      break;
    case GenChanceKind::RampUp:
      set_alpha_coeff(-1.0);
      c.bound = g.ramp_up_mw / base;
      c.label += " ramp up";
      break;
    case GenChanceKind::RampDown:
      set_alpha_coeff(1.0);
      c.bound = g.ramp_down_mw / base;
      c.label += " ramp down";
      break;
  }
  return c;
}

double master_objective(const OpfModel& model, const Vector& x) {
  return model.obj_quad.dot(x.cwiseProduct(x)) + model.obj_lin.dot(x) +
         model.obj_const;
}

Vector master_point(const OpfModel& model, const DispatchSolution& solution) {
  const auto& lay = model.layout;
  Vector x = Vector::Zero(lay.n_vars);
  for (size_t i = 0; i < lay.p_index.size(); ++i) {
    if (lay.p_index[i] >= 0) {
      x[lay.p_index[i]] = solution.p_mw[static_cast<Index>(i)] / model.grid->base_mva;
    }
    if (lay.alpha_index[i] >= 0) {
      x[lay.alpha_index[i]] = solution.alpha[static_cast<Index>(i)];
    }
  }
  return x;
}

DispatchSolution recover_solution(const OpfModel& model, const Vector& x) {
  const GridCase& grid = *model.grid;
  const auto& lay = model.layout;
  const double base = grid.base_mva;
  const size_t ng = grid.generators.size();

  DispatchSolution sol;
  sol.p_mw = Vector::Zero(static_cast<Index>(ng));
  sol.alpha = Vector::Zero(static_cast<Index>(ng));
  for (size_t i = 0; i < ng; ++i) {
    const double p_pu = lay.p_index[i] >= 0 ? x[lay.p_index[i]] : lay.p_fixed_pu[i];
    sol.p_mw[static_cast<Index>(i)] = p_pu * base;
    sol.alpha[static_cast<Index>(i)] =
        lay.alpha_index[i] >= 0 ? x[lay.alpha_index[i]] : lay.alpha_fixed[i];
  }

  Vector inj = Vector::Zero(grid.bus_count());
  for (const Bus& b : grid.buses) inj[b.id] -= b.demand_mw / base;
  for (const WindFarm& w : grid.wind_farms) inj[w.bus] += w.forecast_mw / base;
  for (size_t i = 0; i < ng; ++i) {
    inj[grid.generators[i].bus] += sol.p_mw[static_cast<Index>(i)] / base;
  }
  sol.theta = model.sens->solve_theta(inj);
  sol.flows_mw = model.sens->line_flows(sol.theta) * base;

  Vector alpha_by_bus = Vector::Zero(grid.bus_count());
  for (size_t i = 0; i < ng; ++i) {
    alpha_by_bus[grid.generators[i].bus] += sol.alpha[static_cast<Index>(i)];
  }
  sol.delta = model.mode == OpfMode::Deterministic
                  ? Vector::Zero(grid.bus_count())
                  : solve_delta(*model.sens, alpha_by_bus);

  sol.objective = master_objective(model, x);
  return sol;
}

}  // namespace rccopf
