#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "drcal/linalg.hpp"

namespace drcal {

enum class SolveStatus { optimal, infeasible, unbounded, max_iters };

const char* to_string(SolveStatus s);

/// Convex program in standard form:
///
///   minimize   1/2 x' Q x + c' x
///   subject to A x == b          (duals y, free)
///              G x <= h          (duals z >= 0)
///
/// with the Lagrangian sign convention
///   L(x, y, z) = f(x) + y'(A x - b) + z'(G x - h).
///
/// Variables are free; simple bounds are plain inequality rows.
struct StandardFormProgram {
  SpMat quadratic_term;  // n x n, symmetric PSD; may be 0 x 0 for an LP
  Vec linear_cost;       // n
  SpMat eq_matrix;       // m_e x n
  Vec eq_rhs;            // m_e
  SpMat ineq_matrix;     // m_i x n
  Vec ineq_rhs;          // m_i
  std::vector<std::string> variable_names;  // optional, diagnostics only

  int num_vars() const { return static_cast<int>(linear_cost.size()); }
  int num_eq() const { return static_cast<int>(eq_rhs.size()); }
  int num_ineq() const { return static_cast<int>(ineq_rhs.size()); }

  /// Throws DimensionMismatch on inconsistent shapes or an asymmetric
  /// quadratic term (tolerance 1e-12).
  void validate() const;

  double objective_value(const Vec& x) const;
};

struct SolverOptions {
  double tol = 1e-8;  // absolute KKT residual target
  int max_iters = 100;
  bool polish = true;  // active-set refinement of the final iterate
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal_feas = 0.0;
  double dual_feas = 0.0;
  double complementarity = 0.0;

  double max() const;
};

struct SolverSolution {
  Vec primal;      // n
  Vec eq_duals;    // m_e
  Vec ineq_duals;  // m_i, >= 0 at optimum
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  KktResiduals kkt_residuals;
  int iterations = 0;
};

/// Primal-dual interior-point solve (Mehrotra predictor-corrector) with a
/// final active-set polish. status codes are carried in the result; the
/// solver never throws for infeasible/unbounded inputs.
SolverSolution solve(const StandardFormProgram& program,
                     const SolverOptions& options = {});

/// Recomputes all four KKT residual norms from scratch, independent of any
/// state kept by solve(). Throws DimensionMismatch.
KktResiduals verify_kkt(const StandardFormProgram& program,
                        const SolverSolution& solution);

/// Dual objective -1/2 x'Qx - b'y - h'z evaluated at the solution. Equals the
/// primal objective at an exact KKT point.
double dual_objective(const StandardFormProgram& program,
                      const SolverSolution& solution);

/// Minimal total constraint violation (MW-scale units of the program):
/// min 1't_e + 1't_i over relaxed |Ax-b| <= t_e, Gx <= h + t_i. Zero (up to
/// tolerance) iff the program is feasible.
double measure_infeasibility(const StandardFormProgram& program,
                             const SolverOptions& options = {});

/// Text dump of all program blocks (matrix market layout per block) for
/// offline cross-checking against third-party solvers.
void dump_program(const StandardFormProgram& program, std::ostream& os);
void dump_program_to_file(const StandardFormProgram& program,
                          const std::string& path);

}  // namespace drcal
