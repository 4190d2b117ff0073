#pragma once

#include <utility>

#include "drcal/schedule.hpp"

namespace drcal {

/// Settings for differentiating the stage-one optimum. The schedule LP is
/// solved with an added rho/2 ||x||^2 regularization so its optimum is unique
/// and differentiable; jacobians come from the linearized KKT system at the
/// active set.
struct LayerConfig {
  double regularization_rho = 1e-6;
  double active_set_tol = 1e-7;  // a row is active iff slack <= tol and dual >= tol
  double fd_step = 1e-4;         // default relative step for oracle checks
  SolverOptions solver;
};

enum class ScheduleParam { yhat, eps };

/// Sensitivities of the stacked schedule block G = (g, r+, r-) with respect
/// to the forecast and the ambiguity radii. Both are |G| x n_wind.
struct ScheduleJacobians {
  Mat dG_dyhat;
  Mat dG_deps;
};

/// Solves the rho-regularized schedule program and differentiates the KKT
/// system at its active set. Throws SingularKKT (with a condition estimate)
/// on a degenerate active set and InfeasibleSchedule if the program cannot
/// be solved.
std::pair<ScheduleSolution, ScheduleJacobians> schedule_jacobians(
    const NetworkCase& grid, const Vec& forecast,
    const EmpiricalErrorModel& uq, const LayerConfig& config = {});

/// Central finite differences of the regularized optimal G per coordinate of
/// the chosen parameter; the independent oracle for schedule_jacobians.
/// step is absolute (MW for yhat). Throws InfeasiblePerturbation (naming the
/// coordinate) if a perturbed program leaves the valid domain.
Mat finite_difference_jacobian(const NetworkCase& grid, const Vec& forecast,
                               const EmpiricalErrorModel& uq,
                               ScheduleParam wrt, double step,
                               const LayerConfig& config = {});

/// Regularized schedule solve shared by the analytic and FD paths.
ScheduleSolution solve_schedule_regularized(const NetworkCase& grid,
                                            const Vec& forecast,
                                            const EmpiricalErrorModel& uq,
                                            const LayerConfig& config = {});

}  // namespace drcal
