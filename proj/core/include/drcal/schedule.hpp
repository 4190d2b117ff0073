#pragma once

#include <utility>

#include "drcal/network_case.hpp"
#include "drcal/solver.hpp"
#include "drcal/uncertainty.hpp"

namespace drcal {

/// Index maps from the named variable blocks of the reformulated robust
/// schedule program into the flat primal vector, plus constraint-row offsets
/// for every constraint family. The k dimension always has size 2*n_g + 1.
struct ScheduleProgramLayout {
  int n_g = 0, n_w = 0, n_s = 0, n_l = 0;
  int k_dim = 0;  // 2*n_g + 1

  // variable block offsets
  int g = 0, r_plus = 0, r_minus = 0, a = 0, tau = 0;
  int lambda_o = 0, lambda_c = 0, s_o = 0, s_c_i = 0, s_c_jik = 0;
  int n_vars = 0;

  int a_var(int m, int j) const { return a + m * n_w + j; }          // A[m][j]
  int s_o_var(int j, int i) const { return s_o + j * n_s + i; }
  int s_c_i_var(int i) const { return s_c_i + i; }
  int s_c_var(int j, int i, int k) const {
    return s_c_jik + (j * n_s + i) * k_dim + k;
  }

  // equality rows
  int eq_balance = 0, eq_participation = 0;
  int n_eq = 0;

  // inequality rows
  int gen_upper = 0, gen_lower = 0, flow_upper = 0, flow_lower = 0;
  int s_o_rows[3] = {0, 0, 0};   // the three epigraph families, n_w*n_s each
  int cvar_row = 0;              // single CVaR aggregation row
  int agg_rows = 0;              // n_s * k_dim rows
  int s_c_rows[3] = {0, 0, 0};   // three families, n_w*n_s*k_dim each
  int nn_r_plus = 0, nn_r_minus = 0, nn_a = 0, nn_lambda_o = 0,
      nn_lambda_c = 0;
  int n_ineq = 0;

  int s_o_row(int fam, int j, int i) const {
    return s_o_rows[fam] + j * n_s + i;
  }
  int agg_row(int i, int k) const { return agg_rows + i * k_dim + k; }
  int s_c_row(int fam, int j, int i, int k) const {
    return s_c_rows[fam] + (j * n_s + i) * k_dim + k;
  }
};

/// Stage-one optimum with its objective decomposition. The worst-case term
/// is sum_j (lambda_o_j eps_j + mean_i s_o_ji).
struct ScheduleSolution {
  Vec g;         // MW per generator
  Vec r_plus;    // MW per generator, >= 0
  Vec r_minus;   // MW per generator, >= 0
  Mat a;         // participation factors, n_g x n_w, >= 0
  double tau = 0.0;
  Vec lambda_o;  // per farm, >= 0
  Vec lambda_c;  // per farm, >= 0
  Mat s_o;       // n_w x N_s
  Vec s_c_i;     // N_s
  Vec s_c_jik;   // flat, layout.s_c_var indexing (offset-relative)

  double objective_total = 0.0;
  double objective_stage1 = 0.0;     // c_g'g + c_r'(r+ + r-)
  double objective_worstcase = 0.0;  // lambda_o'eps + mean s_o
  SolveStatus status = SolveStatus::max_iters;
  KktResiduals kkt_residuals;

  Vec raw_primal;  // full flat solution, for diagnostics and tests
};

/// Assembles the reformulated robust schedule program as a (sparse) LP.
/// Every epigraph product is variable x datum, so no bilinear terms appear.
/// Throws DimensionMismatch / UnsetEpsilon; the forecast is clipped into
/// [0, capacity] with a stderr warning when necessary.
std::pair<StandardFormProgram, ScheduleProgramLayout> build_schedule_program(
    const NetworkCase& grid, const Vec& forecast,
    const EmpiricalErrorModel& uq);

/// Builds, solves and unpacks the schedule program. Throws InfeasibleSchedule
/// when the solver certifies infeasibility; other non-optimal statuses are
/// propagated in the result.
ScheduleSolution solve_schedule(const NetworkCase& grid, const Vec& forecast,
                                const EmpiricalErrorModel& uq,
                                const SolverOptions& options = {});

/// Recomputes the worst-case expectation term from the stored blocks,
/// independent of the objective bookkeeping done by solve_schedule.
double worst_case_term(const ScheduleSolution& solution,
                       const EmpiricalErrorModel& uq);

/// Unpacks a flat primal vector into a ScheduleSolution (no status fields).
ScheduleSolution unpack_schedule(const Vec& primal,
                                 const ScheduleProgramLayout& layout,
                                 const NetworkCase& grid,
                                 const EmpiricalErrorModel& uq);

}  // namespace drcal
