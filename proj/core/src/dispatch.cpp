#include "drcal/dispatch.hpp"

#include <cmath>
#include <vector>

#include "drcal/errors.hpp"

namespace drcal {

namespace {

// Variable layout: [r_in+ (ng) | r_in- (ng) | r_out+ (ng) | r_out- (ng)
//                   | shed (nb, slack mode only)]
struct DispatchLayout {
  int ng = 0, nl = 0, nb = 0;
  bool shed = false;
  int rin_p = 0, rin_m = 0, rout_p = 0, rout_m = 0, shed_off = 0;
  int n_vars = 0;
  // inequality rows
  int gen_hi = 0, gen_lo = 0, flow_hi = 0, flow_lo = 0, nu_hi = 0, nu_lo = 0,
      nn = 0;
  int n_ineq = 0;
};

DispatchLayout make_layout(const NetworkCase& grid, bool shed) {
  DispatchLayout L;
  L.ng = grid.n_generators;
  L.nl = grid.n_lines;
  L.nb = grid.n_buses;
  L.shed = shed;
  L.rin_p = 0;
  L.rin_m = L.ng;
  L.rout_p = 2 * L.ng;
  L.rout_m = 3 * L.ng;
  L.shed_off = 4 * L.ng;
  L.n_vars = 4 * L.ng + (shed ? L.nb : 0);
  L.gen_hi = 0;
  L.gen_lo = L.ng;
  L.flow_hi = 2 * L.ng;
  L.flow_lo = 2 * L.ng + L.nl;
  L.nu_hi = 2 * L.ng + 2 * L.nl;
  L.nu_lo = L.nu_hi + L.ng;
  L.nn = L.nu_lo + L.ng;
  L.n_ineq = L.nn + L.n_vars;
  return L;
}

StandardFormProgram build_dispatch_program(const NetworkCase& grid,
                                           const Vec& g_star,
                                           const Vec& r_plus_star,
                                           const Vec& r_minus_star,
                                           const Vec& realized,
                                           const DispatchLayout& L,
                                           double shed_cost) {
  const int ng = L.ng, nl = L.nl;
  StandardFormProgram p;
  p.quadratic_term = SpMat(L.n_vars, L.n_vars);
  p.linear_cost = Vec::Zero(L.n_vars);
  for (int m = 0; m < ng; ++m) {
    p.linear_cost[L.rin_p + m] = grid.cost_in[m];
    p.linear_cost[L.rin_m + m] = grid.cost_in[m];
    p.linear_cost[L.rout_p + m] = grid.cost_out_up[m];
    p.linear_cost[L.rout_m + m] = grid.cost_out_dn[m];
  }
  if (L.shed)
    for (int b = 0; b < L.nb; ++b) p.linear_cost[L.shed_off + b] = shed_cost;

  // net adjustment u = r_in+ - r_in- + r_out+ - r_out-
  auto add_u = [&](std::vector<Triplet>& t, int row, double w) {
    for (int m = 0; m < ng; ++m) {
      t.emplace_back(row, L.rin_p + m, w);
      t.emplace_back(row, L.rin_m + m, -w);
      t.emplace_back(row, L.rout_p + m, w);
      t.emplace_back(row, L.rout_m + m, -w);
    }
  };

  // balance: 1'u (+ 1'shed) = 1'd - 1'g* - 1'y
  std::vector<Triplet> eq;
  add_u(eq, 0, 1.0);
  if (L.shed)
    for (int b = 0; b < L.nb; ++b) eq.emplace_back(0, L.shed_off + b, 1.0);
  p.eq_matrix = SpMat(1, L.n_vars);
  p.eq_matrix.setFromTriplets(eq.begin(), eq.end());
  p.eq_rhs = Vec::Constant(1, grid.demand.sum() - g_star.sum() - realized.sum());

  std::vector<Triplet> in;
  Vec rhs = Vec::Zero(L.n_ineq);

  // generator bounds on g* + u (per generator, not aggregated)
  for (int m = 0; m < ng; ++m) {
    in.emplace_back(L.gen_hi + m, L.rin_p + m, 1.0);
    in.emplace_back(L.gen_hi + m, L.rin_m + m, -1.0);
    in.emplace_back(L.gen_hi + m, L.rout_p + m, 1.0);
    in.emplace_back(L.gen_hi + m, L.rout_m + m, -1.0);
    rhs[L.gen_hi + m] = grid.gen_max[m] - g_star[m];
    in.emplace_back(L.gen_lo + m, L.rin_p + m, -1.0);
    in.emplace_back(L.gen_lo + m, L.rin_m + m, 1.0);
    in.emplace_back(L.gen_lo + m, L.rout_p + m, -1.0);
    in.emplace_back(L.gen_lo + m, L.rout_m + m, 1.0);
    rhs[L.gen_lo + m] = g_star[m] - grid.gen_min[m];
  }

  // line flows: |Phi [S_g (g* + u) + S_w y - d (+ shed)]| <= f
  const Mat phi_sg = grid.ptdf * grid.gen_incidence();
  Vec fixed_inj = -grid.demand;
  for (int j = 0; j < grid.n_wind; ++j)
    fixed_inj[grid.wind_bus[j]] += realized[j];
  for (int m = 0; m < ng; ++m) fixed_inj[grid.gen_bus[m]] += g_star[m];
  const Vec phi_fixed = grid.ptdf * fixed_inj;
  for (int l = 0; l < nl; ++l) {
    for (int m = 0; m < ng; ++m) {
      const double w = phi_sg(l, m);
      if (w == 0.0) continue;
      in.emplace_back(L.flow_hi + l, L.rin_p + m, w);
      in.emplace_back(L.flow_hi + l, L.rin_m + m, -w);
      in.emplace_back(L.flow_hi + l, L.rout_p + m, w);
      in.emplace_back(L.flow_hi + l, L.rout_m + m, -w);
      in.emplace_back(L.flow_lo + l, L.rin_p + m, -w);
      in.emplace_back(L.flow_lo + l, L.rin_m + m, w);
      in.emplace_back(L.flow_lo + l, L.rout_p + m, -w);
      in.emplace_back(L.flow_lo + l, L.rout_m + m, w);
    }
    if (L.shed)
      for (int b = 0; b < L.nb; ++b) {
        const double w = grid.ptdf(l, b);
        if (w == 0.0) continue;
        in.emplace_back(L.flow_hi + l, L.shed_off + b, w);
        in.emplace_back(L.flow_lo + l, L.shed_off + b, -w);
      }
    rhs[L.flow_hi + l] = grid.line_limit[l] - phi_fixed[l];
    rhs[L.flow_lo + l] = grid.line_limit[l] + phi_fixed[l];
  }

  // reserve box on the composite r_in = r_in+ - r_in- (explicit rows so the
  // nu duals attach directly)
  for (int m = 0; m < ng; ++m) {
    in.emplace_back(L.nu_hi + m, L.rin_p + m, 1.0);
    in.emplace_back(L.nu_hi + m, L.rin_m + m, -1.0);
    rhs[L.nu_hi + m] = r_plus_star[m];
    in.emplace_back(L.nu_lo + m, L.rin_p + m, -1.0);
    in.emplace_back(L.nu_lo + m, L.rin_m + m, 1.0);
    rhs[L.nu_lo + m] = r_minus_star[m];
  }

  // nonnegativity of every split variable (and shed)
  for (int v = 0; v < L.n_vars; ++v) in.emplace_back(L.nn + v, v, -1.0);
  if (L.shed)
    for (int b = 0; b < L.nb; ++b)
      rhs[L.nn + L.shed_off + b] = 0.0;  // shed >= 0; ceiling left to balance

  p.ineq_matrix = SpMat(L.n_ineq, L.n_vars);
  p.ineq_matrix.setFromTriplets(in.begin(), in.end());
  p.ineq_rhs = rhs;
  return p;
}

}  // namespace

Vec DispatchPartials::stacked() const {
  Vec out(d_cost_d_g.size() + d_cost_d_r_plus.size() + d_cost_d_r_minus.size());
  out << d_cost_d_g, d_cost_d_r_plus, d_cost_d_r_minus;
  return out;
}

DispatchSolution solve_dispatch(const NetworkCase& grid,
                                const ScheduleSolution& schedule,
                                const Vec& realized,
                                const DispatchOptions& options) {
  if (realized.size() != grid.n_wind)
    throw DimensionMismatch("realized wind length does not match wind farms");
  if (schedule.status != SolveStatus::optimal)
    throw ValidationError("dispatch requires an optimal stage-one schedule");

  const bool shed = options.load_shed_cost >= 0.0;
  const DispatchLayout L = make_layout(grid, shed);
  StandardFormProgram p = build_dispatch_program(
      grid, schedule.g, schedule.r_plus, schedule.r_minus, realized, L,
      options.load_shed_cost);
  SolverSolution sol = solve(p, options.solver);
  if (sol.status == SolveStatus::infeasible) {
    const double unmet = measure_infeasibility(p, options.solver);
    throw InfeasibleDispatch(
        "real-time dispatch infeasible: wind deviation exceeds available "
        "flexibility by " +
            std::to_string(unmet) + " MW",
        unmet);
  }

  DispatchSolution d;
  d.status = sol.status;
  d.kkt_residuals = sol.kkt_residuals;
  const int ng = L.ng;
  d.r_in = sol.primal.segment(L.rin_p, ng) - sol.primal.segment(L.rin_m, ng);
  d.r_out_up = sol.primal.segment(L.rout_p, ng);
  d.r_out_dn = sol.primal.segment(L.rout_m, ng);
  d.cost = sol.objective;
  d.lambda = sol.eq_duals[0];
  d.mu_hi = sol.ineq_duals.segment(L.gen_hi, ng);
  d.mu_lo = sol.ineq_duals.segment(L.gen_lo, ng);
  d.phi_hi = sol.ineq_duals.segment(L.flow_hi, L.nl);
  d.phi_lo = sol.ineq_duals.segment(L.flow_lo, L.nl);
  d.nu_hi = sol.ineq_duals.segment(L.nu_hi, ng);
  d.nu_lo = sol.ineq_duals.segment(L.nu_lo, ng);
  if (shed) {
    d.shed = sol.primal.segment(L.shed_off, L.nb);
    d.shed_load = d.shed.sum();
  } else {
    d.shed = Vec::Zero(grid.n_buses);
  }
  return d;
}

DispatchPartials dispatch_value_partials(const DispatchSolution& solution,
                                         const NetworkCase& grid) {
  DispatchPartials out;
  const int ng = grid.n_generators;
  out.d_cost_d_g =
      Vec::Constant(ng, solution.lambda) - solution.mu_lo + solution.mu_hi +
      grid.gen_incidence().transpose() * grid.ptdf.transpose() *
          (solution.phi_hi - solution.phi_lo);
  out.d_cost_d_r_plus = -solution.nu_hi;
  out.d_cost_d_r_minus = -solution.nu_lo;
  return out;
}

}  // namespace drcal
