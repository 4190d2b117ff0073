#include "drcal/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

#include "drcal/errors.hpp"

namespace drcal {

namespace {

ScheduleProgramLayout make_layout(const NetworkCase& grid,
                                  const EmpiricalErrorModel& uq) {
  ScheduleProgramLayout L;
  L.n_g = grid.n_generators;
  L.n_w = grid.n_wind;
  L.n_s = uq.n_samples();
  L.n_l = grid.n_lines;
  L.k_dim = 2 * L.n_g + 1;

  int off = 0;
  L.g = off;
  off += L.n_g;
  L.r_plus = off;
  off += L.n_g;
  L.r_minus = off;
  off += L.n_g;
  L.a = off;
  off += L.n_g * L.n_w;
  L.tau = off;
  off += 1;
  L.lambda_o = off;
  off += L.n_w;
  L.lambda_c = off;
  off += L.n_w;
  L.s_o = off;
  off += L.n_w * L.n_s;
  L.s_c_i = off;
  off += L.n_s;
  L.s_c_jik = off;
  off += L.n_w * L.n_s * L.k_dim;
  L.n_vars = off;

  off = 0;
  L.eq_balance = off;
  off += 1;
  L.eq_participation = off;
  off += L.n_w;
  L.n_eq = off;

  off = 0;
  L.gen_upper = off;
  off += L.n_g;
  L.gen_lower = off;
  off += L.n_g;
  L.flow_upper = off;
  off += L.n_l;
  L.flow_lower = off;
  off += L.n_l;
  for (int fam = 0; fam < 3; ++fam) {
    L.s_o_rows[fam] = off;
    off += L.n_w * L.n_s;
  }
  L.cvar_row = off;
  off += 1;
  L.agg_rows = off;
  off += L.n_s * L.k_dim;
  for (int fam = 0; fam < 3; ++fam) {
    L.s_c_rows[fam] = off;
    off += L.n_w * L.n_s * L.k_dim;
  }
  L.nn_r_plus = off;
  off += L.n_g;
  L.nn_r_minus = off;
  off += L.n_g;
  L.nn_a = off;
  off += L.n_g * L.n_w;
  L.nn_lambda_o = off;
  off += L.n_w;
  L.nn_lambda_c = off;
  off += L.n_w;
  L.n_ineq = off;
  return L;
}

}  // namespace

std::pair<StandardFormProgram, ScheduleProgramLayout> build_schedule_program(
    const NetworkCase& grid, const Vec& forecast,
    const EmpiricalErrorModel& uq) {
  if (forecast.size() != grid.n_wind)
    throw DimensionMismatch("forecast length does not match wind farms");
  if (uq.n_wind() != grid.n_wind)
    throw DimensionMismatch("error model does not match wind farms");
  if (!uq.epsilon_set())
    throw UnsetEpsilon("ambiguity radii epsilon have not been prescribed");
  uq.validate();

  Vec yhat = forecast;
  for (int j = 0; j < grid.n_wind; ++j) {
    if (yhat[j] < 0.0 || yhat[j] > grid.wind_capacity[j]) {
      std::cerr << "warning: forecast for farm " << (j + 1) << " (" << yhat[j]
                << " MW) clipped into [0, " << grid.wind_capacity[j] << "]\n";
      yhat[j] = std::clamp(yhat[j], 0.0, grid.wind_capacity[j]);
    }
  }

  const ScheduleProgramLayout L = make_layout(grid, uq);
  const int ng = L.n_g, nw = L.n_w, ns = L.n_s, nl = L.n_l, K = L.k_dim;
  const double gamma = uq.risk_level;

  StandardFormProgram p;
  p.quadratic_term = SpMat(L.n_vars, L.n_vars);
  p.linear_cost = Vec::Zero(L.n_vars);
  for (int m = 0; m < ng; ++m) {
    p.linear_cost[L.g + m] = grid.cost_energy[m];
    p.linear_cost[L.r_plus + m] = grid.cost_reserve[m];
    p.linear_cost[L.r_minus + m] = grid.cost_reserve[m];
  }
  for (int j = 0; j < nw; ++j) {
    p.linear_cost[L.lambda_o + j] = uq.epsilon[j];
    for (int i = 0; i < ns; ++i)
      p.linear_cost[L.s_o_var(j, i)] = 1.0 / ns;
  }

  // ---- equalities ----
  std::vector<Triplet> eq;
  Vec eq_rhs = Vec::Zero(L.n_eq);
  for (int m = 0; m < ng; ++m) eq.emplace_back(L.eq_balance, L.g + m, 1.0);
  eq_rhs[L.eq_balance] = grid.demand.sum() - yhat.sum();
  for (int j = 0; j < nw; ++j) {
    for (int m = 0; m < ng; ++m)
      eq.emplace_back(L.eq_participation + j, L.a_var(m, j), 1.0);
    eq_rhs[L.eq_participation + j] = 1.0;
  }
  p.eq_matrix = SpMat(L.n_eq, L.n_vars);
  p.eq_matrix.setFromTriplets(eq.begin(), eq.end());
  p.eq_rhs = eq_rhs;

  // ---- inequalities ----
  std::vector<Triplet> in;
  Vec rhs = Vec::Zero(L.n_ineq);

  // generator bounds with reserves: g + r+ <= gmax; -g + r- <= -gmin
  for (int m = 0; m < ng; ++m) {
    in.emplace_back(L.gen_upper + m, L.g + m, 1.0);
    in.emplace_back(L.gen_upper + m, L.r_plus + m, 1.0);
    rhs[L.gen_upper + m] = grid.gen_max[m];
    in.emplace_back(L.gen_lower + m, L.g + m, -1.0);
    in.emplace_back(L.gen_lower + m, L.r_minus + m, 1.0);
    rhs[L.gen_lower + m] = -grid.gen_min[m];
  }

  // PTDF line limits on nominal injections
  const Mat phi_sg = grid.ptdf * grid.gen_incidence();  // nl x ng
  Vec fixed_inj = -grid.demand;                         // S_w yhat - d
  for (int j = 0; j < nw; ++j) fixed_inj[grid.wind_bus[j]] += yhat[j];
  const Vec phi_fixed = grid.ptdf * fixed_inj;          // nl
  for (int l = 0; l < nl; ++l) {
    for (int m = 0; m < ng; ++m) {
      if (phi_sg(l, m) != 0.0) {
        in.emplace_back(L.flow_upper + l, L.g + m, phi_sg(l, m));
        in.emplace_back(L.flow_lower + l, L.g + m, -phi_sg(l, m));
      }
    }
    rhs[L.flow_upper + l] = grid.line_limit[l] - phi_fixed[l];
    rhs[L.flow_lower + l] = grid.line_limit[l] + phi_fixed[l];
  }

  // s_o epigraph families; a_o_j = -(A' c_a)_j enters as coefficients on A
  const Vec& ca = grid.cost_activation;
  for (int j = 0; j < nw; ++j) {
    const double xi_up = uq.xi_upper[j];
    const double xi_lo = uq.xi_lower[j];
    for (int i = 0; i < ns; ++i) {
      const double xi = uq.errors(j, i);
      // family 0: a_o_j xi_hat - s_o <= 0
      for (int m = 0; m < ng; ++m)
        in.emplace_back(L.s_o_row(0, j, i), L.a_var(m, j), -ca[m] * xi);
      in.emplace_back(L.s_o_row(0, j, i), L.s_o_var(j, i), -1.0);
      // family 1: a_o_j xi_up - lambda_o (xi_up - xi_hat) - s_o <= 0
      for (int m = 0; m < ng; ++m)
        in.emplace_back(L.s_o_row(1, j, i), L.a_var(m, j), -ca[m] * xi_up);
      in.emplace_back(L.s_o_row(1, j, i), L.lambda_o + j, -(xi_up - xi));
      in.emplace_back(L.s_o_row(1, j, i), L.s_o_var(j, i), -1.0);
      // family 2: a_o_j xi_lo + lambda_o (xi_lo - xi_hat) - s_o <= 0
      for (int m = 0; m < ng; ++m)
        in.emplace_back(L.s_o_row(2, j, i), L.a_var(m, j), -ca[m] * xi_lo);
      in.emplace_back(L.s_o_row(2, j, i), L.lambda_o + j, xi_lo - xi);
      in.emplace_back(L.s_o_row(2, j, i), L.s_o_var(j, i), -1.0);
    }
  }

  // CVaR aggregation row: tau + (1/gamma)(sum_j eps_j lambda_c_j
  //                                       + (1/N_s) sum_i s_c_i) <= 0
  in.emplace_back(L.cvar_row, L.tau, 1.0);
  for (int j = 0; j < nw; ++j)
    in.emplace_back(L.cvar_row, L.lambda_c + j, uq.epsilon[j] / gamma);
  for (int i = 0; i < ns; ++i)
    in.emplace_back(L.cvar_row, L.s_c_i_var(i), 1.0 / (gamma * ns));

  // per-sample aggregation over k: b_c_k + sum_j s_c_jik - s_c_i <= 0
  // with b_c stacked as [0; -r+ - tau 1; -r- - tau 1]
  for (int i = 0; i < ns; ++i) {
    for (int k = 0; k < K; ++k) {
      const int row = L.agg_row(i, k);
      if (k >= 1 && k <= ng) {
        in.emplace_back(row, L.r_plus + (k - 1), -1.0);
        in.emplace_back(row, L.tau, -1.0);
      } else if (k > ng) {
        in.emplace_back(row, L.r_minus + (k - ng - 1), -1.0);
        in.emplace_back(row, L.tau, -1.0);
      }
      for (int j = 0; j < nw; ++j)
        in.emplace_back(row, L.s_c_var(j, i, k), 1.0);
      in.emplace_back(row, L.s_c_i_var(i), -1.0);
    }
  }

  // s_c epigraph families; a_c_k is the k-th row of [0; A; -A]
  for (int j = 0; j < nw; ++j) {
    const double xi_up = uq.xi_upper[j];
    const double xi_lo = uq.xi_lower[j];
    for (int i = 0; i < ns; ++i) {
      const double xi = uq.errors(j, i);
      for (int k = 0; k < K; ++k) {
        double sign = 0.0;
        int m = -1;
        if (k >= 1 && k <= ng) {
          sign = 1.0;
          m = k - 1;
        } else if (k > ng) {
          sign = -1.0;
          m = k - ng - 1;
        }
        // family 0: a_c_kj xi_hat - s_c <= 0
        if (m >= 0)
          in.emplace_back(L.s_c_row(0, j, i, k), L.a_var(m, j), sign * xi);
        in.emplace_back(L.s_c_row(0, j, i, k), L.s_c_var(j, i, k), -1.0);
        // family 1: a_c_kj xi_up - lambda_c (xi_up - xi_hat) - s_c <= 0
        if (m >= 0)
          in.emplace_back(L.s_c_row(1, j, i, k), L.a_var(m, j), sign * xi_up);
        in.emplace_back(L.s_c_row(1, j, i, k), L.lambda_c + j, -(xi_up - xi));
        in.emplace_back(L.s_c_row(1, j, i, k), L.s_c_var(j, i, k), -1.0);
        // family 2: a_c_kj xi_lo + lambda_c (xi_lo - xi_hat) - s_c <= 0
        if (m >= 0)
          in.emplace_back(L.s_c_row(2, j, i, k), L.a_var(m, j), sign * xi_lo);
        in.emplace_back(L.s_c_row(2, j, i, k), L.lambda_c + j, xi_lo - xi);
        in.emplace_back(L.s_c_row(2, j, i, k), L.s_c_var(j, i, k), -1.0);
      }
    }
  }

  // nonnegativity of r+, r-, A, lambda_o, lambda_c (tau and g stay free)
  for (int m = 0; m < ng; ++m) {
    in.emplace_back(L.nn_r_plus + m, L.r_plus + m, -1.0);
    in.emplace_back(L.nn_r_minus + m, L.r_minus + m, -1.0);
  }
  for (int m = 0; m < ng; ++m)
    for (int j = 0; j < nw; ++j)
      in.emplace_back(L.nn_a + m * nw + j, L.a_var(m, j), -1.0);
  for (int j = 0; j < nw; ++j) {
    in.emplace_back(L.nn_lambda_o + j, L.lambda_o + j, -1.0);
    in.emplace_back(L.nn_lambda_c + j, L.lambda_c + j, -1.0);
  }

  p.ineq_matrix = SpMat(L.n_ineq, L.n_vars);
  p.ineq_matrix.setFromTriplets(in.begin(), in.end());
  p.ineq_rhs = rhs;
  return {std::move(p), L};
}

ScheduleSolution unpack_schedule(const Vec& primal,
                                 const ScheduleProgramLayout& L,
                                 const NetworkCase& grid,
                                 const EmpiricalErrorModel& uq) {
  ScheduleSolution s;
  s.raw_primal = primal;
  s.g = primal.segment(L.g, L.n_g);
  s.r_plus = primal.segment(L.r_plus, L.n_g);
  s.r_minus = primal.segment(L.r_minus, L.n_g);
  s.a = Mat(L.n_g, L.n_w);
  for (int m = 0; m < L.n_g; ++m)
    for (int j = 0; j < L.n_w; ++j) s.a(m, j) = primal[L.a_var(m, j)];
  s.tau = primal[L.tau];
  s.lambda_o = primal.segment(L.lambda_o, L.n_w);
  s.lambda_c = primal.segment(L.lambda_c, L.n_w);
  s.s_o = Mat(L.n_w, L.n_s);
  for (int j = 0; j < L.n_w; ++j)
    for (int i = 0; i < L.n_s; ++i) s.s_o(j, i) = primal[L.s_o_var(j, i)];
  s.s_c_i = primal.segment(L.s_c_i, L.n_s);
  s.s_c_jik = primal.segment(L.s_c_jik, L.n_w * L.n_s * L.k_dim);

  s.objective_stage1 = grid.cost_energy.dot(s.g) +
                       grid.cost_reserve.dot(s.r_plus + s.r_minus);
  double wc = 0.0;
  for (int j = 0; j < L.n_w; ++j) {
    wc += s.lambda_o[j] * uq.epsilon[j];
    wc += s.s_o.row(j).sum() / L.n_s;
  }
  s.objective_worstcase = wc;
  s.objective_total = s.objective_stage1 + s.objective_worstcase;
  return s;
}

ScheduleSolution solve_schedule(const NetworkCase& grid, const Vec& forecast,
                                const EmpiricalErrorModel& uq,
                                const SolverOptions& options) {
  auto [program, layout] = build_schedule_program(grid, forecast, uq);
  SolverSolution sol = solve(program, options);
  if (sol.status == SolveStatus::infeasible ||
      sol.status == SolveStatus::unbounded)
    throw InfeasibleSchedule(
        std::string("schedule program is ") + to_string(sol.status) +
        " (demand may exceed deliverable capacity under required reserves)");
  ScheduleSolution s = unpack_schedule(sol.primal, layout, grid, uq);
  s.status = sol.status;
  s.kkt_residuals = sol.kkt_residuals;
  return s;
}

double worst_case_term(const ScheduleSolution& solution,
                       const EmpiricalErrorModel& uq) {
  const int nw = static_cast<int>(solution.lambda_o.size());
  const int ns = static_cast<int>(solution.s_o.cols());
  double total = 0.0;
  for (int j = 0; j < nw; ++j) {
    double mean_s = 0.0;
    for (int i = 0; i < ns; ++i) mean_s += solution.s_o(j, i);
    mean_s /= ns;
    total += solution.lambda_o[j] * uq.epsilon[j] + mean_s;
  }
  return total;
}

}  // namespace drcal
