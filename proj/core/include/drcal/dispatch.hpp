#pragma once

#include "drcal/network_case.hpp"
#include "drcal/schedule.hpp"
#include "drcal/solver.hpp"

namespace drcal {

/// Real-time dispatch optimum. r_in is the signed within-reserve adjustment
/// (the LP splits it into positive parts internally); duals are mapped back
/// to the unsplit constraints. phi_hi attaches to the +limit flow row,
/// phi_lo to the -limit row.
struct DispatchSolution {
  Vec r_in;       // MW per generator, signed
  Vec r_out_up;   // MW per generator, >= 0
  Vec r_out_dn;   // MW per generator, >= 0
  double cost = 0.0;

  double lambda = 0.0;  // power balance dual (free sign)
  Vec mu_lo, mu_hi;     // generator bound duals, >= 0
  Vec phi_lo, phi_hi;   // line limit duals, >= 0
  Vec nu_lo, nu_hi;     // reserve box duals, >= 0

  Vec shed;                // MW per bus; only nonzero in slack mode
  double shed_load = 0.0;  // total shed MW
  SolveStatus status = SolveStatus::max_iters;
  KktResiduals kkt_residuals;
};

struct DispatchOptions {
  SolverOptions solver;
  /// When >= 0, enables a load-shedding slack at every bus at this $/MW price
  /// instead of raising InfeasibleDispatch.
  double load_shed_cost = -1.0;
};

/// Solves the stage-two dispatch LP for a realized wind vector against the
/// stage-one schedule. Throws InfeasibleDispatch (with the unmet imbalance in
/// MW) unless load shedding is enabled.
DispatchSolution solve_dispatch(const NetworkCase& grid,
                                const ScheduleSolution& schedule,
                                const Vec& realized,
                                const DispatchOptions& options = {});

/// Envelope-theorem partials of the optimal dispatch cost with respect to the
/// stage-one schedule:
///   d cost / d g*  = lambda 1 - mu_lo + mu_hi + S_g' Phi' (phi_hi - phi_lo)
///   d cost / d r+* = -nu_hi
///   d cost / d r-* = -nu_lo
struct DispatchPartials {
  Vec d_cost_d_g;
  Vec d_cost_d_r_plus;
  Vec d_cost_d_r_minus;

  /// Stacked (g, r+, r-) ordering used by the schedule jacobians.
  Vec stacked() const;
};

DispatchPartials dispatch_value_partials(const DispatchSolution& solution,
                                         const NetworkCase& grid);

}  // namespace drcal
