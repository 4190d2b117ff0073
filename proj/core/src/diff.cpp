#include "drcal/diff.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "drcal/errors.hpp"

namespace drcal {

namespace {

struct RegularizedSolve {
  StandardFormProgram program;
  ScheduleProgramLayout layout;
  SolverSolution solution;
};

RegularizedSolve solve_reg(const NetworkCase& grid, const Vec& forecast,
                           const EmpiricalErrorModel& uq,
                           const LayerConfig& config) {
  if (config.regularization_rho <= 0.0)
    throw ValidationError(
        "regularization_rho must be positive for schedule differentiation");
  RegularizedSolve r;
  std::tie(r.program, r.layout) = build_schedule_program(grid, forecast, uq);
  SpMat reg(r.layout.n_vars, r.layout.n_vars);
  reg.setIdentity();
  r.program.quadratic_term = reg * config.regularization_rho;
  r.solution = solve(r.program, config.solver);
  if (r.solution.status != SolveStatus::optimal)
    throw InfeasibleSchedule(
        std::string("regularized schedule solve ended with status ") +
        to_string(r.solution.status));
  return r;
}

}  // namespace

ScheduleSolution solve_schedule_regularized(const NetworkCase& grid,
                                            const Vec& forecast,
                                            const EmpiricalErrorModel& uq,
                                            const LayerConfig& config) {
  RegularizedSolve r = solve_reg(grid, forecast, uq, config);
  ScheduleSolution s = unpack_schedule(r.solution.primal, r.layout, grid, uq);
  s.status = r.solution.status;
  s.kkt_residuals = r.solution.kkt_residuals;
  return s;
}

std::pair<ScheduleSolution, ScheduleJacobians> schedule_jacobians(
    const NetworkCase& grid, const Vec& forecast,
    const EmpiricalErrorModel& uq, const LayerConfig& config) {
  RegularizedSolve r = solve_reg(grid, forecast, uq, config);
  const ScheduleProgramLayout& L = r.layout;
  const StandardFormProgram& p = r.program;
  const int n = L.n_vars;
  const int me = L.n_eq;
  const int nw = L.n_w;
  const double atol = config.active_set_tol;

  const Vec slack = p.ineq_rhs - p.ineq_matrix * r.solution.primal;
  std::vector<int> active;
  for (int i = 0; i < L.n_ineq; ++i)
    if (slack[i] <= atol && r.solution.ineq_duals[i] >= atol)
      active.push_back(i);
  const int ma = static_cast<int>(active.size());

  // KKT matrix
  //   [ rho I   J' ]        J = [eq_matrix; active rows of ineq_matrix]
  //   [ J       0  ]
  std::vector<Triplet> trips;
  for (int v = 0; v < n; ++v)
    trips.emplace_back(v, v, config.regularization_rho);
  for (int k = 0; k < p.eq_matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.eq_matrix, k); it; ++it) {
      trips.emplace_back(n + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()),
                         n + static_cast<int>(it.row()), it.value());
    }
  {
    SpMat Gt = p.ineq_matrix.transpose();  // column j = row j of G
    for (int a = 0; a < ma; ++a) {
      const int i = active[a];
      for (SpMat::InnerIterator it(Gt, i); it; ++it) {
        trips.emplace_back(n + me + a, static_cast<int>(it.row()), it.value());
        trips.emplace_back(static_cast<int>(it.row()), n + me + a, it.value());
      }
    }
  }
  const int dim = n + me + ma;
  SpMat kkt(dim, dim);
  kkt.setFromTriplets(trips.begin(), trips.end());

  Eigen::SparseLU<SpMat> lu;
  lu.compute(kkt);
  if (lu.info() != Eigen::Success)
    throw SingularKKT(
        "KKT system singular at the selected active set (" +
            std::to_string(ma) + " active rows)",
        std::numeric_limits<double>::infinity());

  auto solve_checked = [&](const Vec& rhs) {
    Vec u = lu.solve(rhs);
    Vec res = rhs - kkt * u;
    double rn = res.cwiseAbs().maxCoeff();
    if (rn > 1e-10 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
      u += lu.solve(res);
      res = rhs - kkt * u;
      rn = res.cwiseAbs().maxCoeff();
    }
    if (!u.allFinite() || rn > 1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()))
      throw SingularKKT("KKT sensitivity solve failed to converge", rn);
    return u;
  };

  // position of the CVaR row inside the active block, if active
  int cvar_pos = -1;
  for (int a = 0; a < ma; ++a)
    if (active[a] == L.cvar_row) {
      cvar_pos = a;
      break;
    }

  const Mat phi_sw = grid.ptdf * grid.wind_incidence();  // nl x nw
  const double gamma = uq.risk_level;
  ScheduleJacobians jac;
  jac.dG_dyhat = Mat::Zero(3 * L.n_g, nw);
  jac.dG_deps = Mat::Zero(3 * L.n_g, nw);

  for (int j = 0; j < nw; ++j) {
    // --- d/d yhat_j: enters the balance rhs and the flow-limit rhs ---
    Vec rhs = Vec::Zero(dim);
    rhs[n + L.eq_balance] = -1.0;
    for (int a = 0; a < ma; ++a) {
      const int row = active[a];
      if (row >= L.flow_upper && row < L.flow_upper + L.n_l)
        rhs[n + me + a] = -phi_sw(row - L.flow_upper, j);
      else if (row >= L.flow_lower && row < L.flow_lower + L.n_l)
        rhs[n + me + a] = phi_sw(row - L.flow_lower, j);
    }
    Vec u = solve_checked(rhs);
    jac.dG_dyhat.col(j) = u.head(3 * L.n_g);

    // --- d/d eps_j: enters the objective (lambda_o_j coefficient) and the
    //     CVaR row coefficient on lambda_c_j ---
    rhs.setZero();
    rhs[L.lambda_o + j] = -1.0;  // -dc
    if (cvar_pos >= 0) {
      const double z = r.solution.ineq_duals[L.cvar_row];
      rhs[L.lambda_c + j] += -z / gamma;                        // -dG' z
      rhs[n + me + cvar_pos] =
          -r.solution.primal[L.lambda_c + j] / gamma;           // -(dG x)
    }
    u = solve_checked(rhs);
    jac.dG_deps.col(j) = u.head(3 * L.n_g);
  }

  ScheduleSolution s = unpack_schedule(r.solution.primal, L, grid, uq);
  s.status = r.solution.status;
  s.kkt_residuals = r.solution.kkt_residuals;
  return {std::move(s), std::move(jac)};
}

Mat finite_difference_jacobian(const NetworkCase& grid, const Vec& forecast,
                               const EmpiricalErrorModel& uq,
                               ScheduleParam wrt, double step,
                               const LayerConfig& config) {
  if (!(step > 0.0))
    throw ValidationError("finite difference step must be > 0");
  const int nw = grid.n_wind;
  const int ng = grid.n_generators;
  Mat jac(3 * ng, nw);

  auto g_block = [&](const ScheduleSolution& s) {
    Vec out(3 * ng);
    out << s.g, s.r_plus, s.r_minus;
    return out;
  };

  for (int j = 0; j < nw; ++j) {
    Vec g_hi, g_lo;
    if (wrt == ScheduleParam::yhat) {
      if (forecast[j] + step > grid.wind_capacity[j] || forecast[j] - step < 0.0)
        throw InfeasiblePerturbation(
            "forecast perturbation leaves [0, capacity] for farm " +
                std::to_string(j + 1),
            j);
      Vec ypl = forecast, ymi = forecast;
      ypl[j] += step;
      ymi[j] -= step;
      g_hi = g_block(solve_schedule_regularized(grid, ypl, uq, config));
      g_lo = g_block(solve_schedule_regularized(grid, ymi, uq, config));
    } else {
      if (uq.epsilon[j] - step < 0.0)
        throw InfeasiblePerturbation(
            "epsilon perturbation becomes negative for farm " +
                std::to_string(j + 1),
            j);
      EmpiricalErrorModel up = uq, dn = uq;
      up.epsilon[j] += step;
      dn.epsilon[j] -= step;
      g_hi = g_block(solve_schedule_regularized(grid, forecast, up, config));
      g_lo = g_block(solve_schedule_regularized(grid, forecast, dn, config));
    }
    jac.col(j) = (g_hi - g_lo) / (2.0 * step);
  }
  return jac;
}

}  // namespace drcal
