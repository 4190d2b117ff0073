#include "drcal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "drcal/errors.hpp"

namespace drcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool has_quadratic(const StandardFormProgram& p) {
  return p.quadratic_term.rows() > 0 && p.quadratic_term.nonZeros() > 0;
}

Vec quad_times(const StandardFormProgram& p, const Vec& x) {
  if (!has_quadratic(p)) return Vec::Zero(x.size());
  return p.quadratic_term * x;
}

double inf_norm(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Assembles the symmetric KKT matrix
//   [ H + dp*I    J' ]
//   [ J        -dd*I ]
// where J stacks the equality rows (and, for polish, active inequality rows).
SpMat assemble_kkt(const SpMat& H, const SpMat& J, double dp, double dd) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(J.rows());
  std::vector<Triplet> trips;
  trips.reserve(H.nonZeros() + 2 * J.nonZeros() + n + m);
  for (int k = 0; k < H.outerSize(); ++k)
    for (SpMat::InnerIterator it(H, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, dp);
  for (int k = 0; k < J.outerSize(); ++k)
    for (SpMat::InnerIterator it(J, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      trips.emplace_back(n + r, c, it.value());
      trips.emplace_back(c, n + r, it.value());
    }
  for (int i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, -dd);
  SpMat K(n + m, n + m);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

// Solves the quasi-definite system [[H, J'], [J, 0]] u = rhs through a
// statically regularized LDL' factorization plus iterative refinement
// against the unregularized operator.
class KktSolver {
 public:
  // Returns false if the system is numerically singular.
  bool factorize(const SpMat& H, const SpMat& J) {
    H_ = &H;
    J_ = &J;
    double reg = 1e-11;
    for (int attempt = 0; attempt < 6; ++attempt) {
      SpMat K = assemble_kkt(H, J, reg, reg);
      if (!analyzed_) {
        ldlt_.analyzePattern(K);
        analyzed_ = true;
      }
      ldlt_.factorize(K);
      if (ldlt_.info() == Eigen::Success) {
        const Vec d = ldlt_.vectorD();
        if (d.size() > 0 && d.cwiseAbs().minCoeff() > 0.0 &&
            d.allFinite()) {
          reg_ = reg;
          return true;
        }
      }
      reg *= 100.0;
      analyzed_ = false;  // pattern is unchanged but stay safe after failure
    }
    return false;
  }

  Vec apply_unregularized(const Vec& u) const {
    const int n = static_cast<int>(H_->rows());
    const int m = static_cast<int>(J_->rows());
    Vec out(n + m);
    out.head(n) = (*H_) * u.head(n);
    if (m > 0) {
      out.head(n) += J_->transpose() * u.tail(m);
      out.tail(m) = (*J_) * u.head(n);
    }
    return out;
  }

  Vec solve(const Vec& rhs) const {
    Vec u = ldlt_.solve(rhs);
    double best = kInf;
    Vec best_u = u;
    for (int it = 0; it < 4; ++it) {
      Vec r = rhs - apply_unregularized(u);
      const double rn = inf_norm(r);
      if (!std::isfinite(rn)) break;
      if (rn < best) {
        best = rn;
        best_u = u;
      }
      if (rn < 1e-14 * (1.0 + inf_norm(rhs))) break;
      u += ldlt_.solve(r);
    }
    return best_u;
  }

  double condition_estimate() const {
    const Vec d = ldlt_.vectorD().cwiseAbs();
    if (d.size() == 0) return 1.0;
    const double lo = d.minCoeff();
    return lo > 0.0 ? d.maxCoeff() / lo : kInf;
  }

 private:
  const SpMat* H_ = nullptr;
  const SpMat* J_ = nullptr;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
  double reg_ = 0.0;
};

struct Iterate {
  Vec x, y, z, s;
};

KktResiduals residuals_at(const StandardFormProgram& p, const Vec& x,
                          const Vec& y, const Vec& z) {
  KktResiduals r;
  Vec stat = quad_times(p, x) + p.linear_cost;
  if (p.num_eq() > 0) stat += p.eq_matrix.transpose() * y;
  if (p.num_ineq() > 0) stat += p.ineq_matrix.transpose() * z;
  r.stationarity = inf_norm(stat);
  double pf = 0.0;
  if (p.num_eq() > 0) pf = inf_norm(p.eq_matrix * x - p.eq_rhs);
  if (p.num_ineq() > 0) {
    Vec viol = p.ineq_matrix * x - p.ineq_rhs;
    pf = std::max(pf, viol.size() ? std::max(0.0, viol.maxCoeff()) : 0.0);
    Vec slack = -viol;
    double comp = 0.0;
    for (int i = 0; i < z.size(); ++i)
      comp = std::max(comp, std::abs(z[i] * slack[i]));
    r.complementarity = comp;
    r.dual_feas = z.size() ? std::max(0.0, -z.minCoeff()) : 0.0;
  }
  r.primal_feas = pf;
  return r;
}

// Active-set refinement of an interior-point iterate. Solves the KKT system
// restricted to the rows the iterate identifies as active; drops rows whose
// refined multiplier comes out negative and retries a few times.
bool polish(const StandardFormProgram& p, Iterate& it) {
  const int n = p.num_vars();
  const int me = p.num_eq();
  const int mi = p.num_ineq();
  std::vector<int> active;
  for (int i = 0; i < mi; ++i)
    if (it.z[i] > it.s[i]) active.push_back(i);

  SpMat H(n, n);
  if (has_quadratic(p)) H = p.quadratic_term;

  for (int round = 0; round < 3; ++round) {
    const int ma = static_cast<int>(active.size());
    std::vector<Triplet> jt;
    for (int k = 0; k < p.eq_matrix.outerSize(); ++k)
      for (SpMat::InnerIterator e(p.eq_matrix, k); e; ++e)
        jt.emplace_back(static_cast<int>(e.row()), static_cast<int>(e.col()),
                        e.value());
    {
      // gather active rows of G
      SpMat Grow = p.ineq_matrix;  // column-major; iterate rows via transpose
      SpMat Gt = Grow.transpose();
      for (int a = 0; a < ma; ++a) {
        const int i = active[a];
        for (SpMat::InnerIterator g(Gt, i); g; ++g)
          jt.emplace_back(me + a, static_cast<int>(g.row()), g.value());
      }
    }
    SpMat J(me + ma, n);
    J.setFromTriplets(jt.begin(), jt.end());

    KktSolver kkt;
    if (!kkt.factorize(H, J)) return false;
    Vec rhs(n + me + ma);
    rhs.head(n) = -p.linear_cost;
    if (me > 0) rhs.segment(n, me) = p.eq_rhs;
    for (int a = 0; a < ma; ++a) rhs[n + me + a] = p.ineq_rhs[active[a]];
    Vec u = kkt.solve(rhs);
    if (!u.allFinite()) return false;

    Vec za = u.tail(ma);
    std::vector<int> keep;
    for (int a = 0; a < ma; ++a)
      if (za[a] >= -1e-9) keep.push_back(active[a]);
    if (static_cast<int>(keep.size()) == ma || round == 2) {
      it.x = u.head(n);
      it.y = u.segment(n, me);
      it.z = Vec::Zero(mi);
      for (int a = 0; a < ma; ++a)
        it.z[active[a]] = std::max(0.0, za[a]);
      if (mi > 0) it.s = p.ineq_rhs - p.ineq_matrix * it.x;
      return true;
    }
    std::vector<int> next(keep.begin(), keep.end());
    active.swap(next);
  }
  return false;
}

SolverSolution classify_and_pack(const StandardFormProgram& p,
                                 const SolverOptions& opts, Iterate it,
                                 int iters, bool allow_diagnosis);

// Solves an unconstrained or equality-only program directly.
SolverSolution solve_direct(const StandardFormProgram& p,
                            const SolverOptions& opts) {
  const int n = p.num_vars();
  const int me = p.num_eq();
  SolverSolution sol;
  sol.primal = Vec::Zero(n);
  sol.eq_duals = Vec::Zero(me);
  sol.ineq_duals = Vec::Zero(0);
  Mat K = Mat::Zero(n + me, n + me);
  if (has_quadratic(p)) K.topLeftCorner(n, n) = Mat(p.quadratic_term);
  if (me > 0) {
    Mat A = Mat(p.eq_matrix);
    K.topRightCorner(n, me) = A.transpose();
    K.bottomLeftCorner(me, n) = A;
  }
  Vec rhs(n + me);
  rhs.head(n) = -p.linear_cost;
  if (me > 0) rhs.tail(me) = p.eq_rhs;
  Eigen::FullPivLU<Mat> lu(K);
  if (lu.isInvertible()) {
    Vec u = lu.solve(rhs);
    sol.primal = u.head(n);
    sol.eq_duals = u.tail(me);
    sol.kkt_residuals = residuals_at(p, sol.primal, sol.eq_duals, sol.ineq_duals);
    sol.objective = p.objective_value(sol.primal);
    sol.status = sol.kkt_residuals.max() <= opts.tol ? SolveStatus::optimal
                                                     : SolveStatus::max_iters;
    return sol;
  }
  // Singular KKT: consistent => some solution still optimal, else the
  // program is unbounded (stationarity unattainable) or infeasible
  // (inconsistent equalities).
  Vec u = K.completeOrthogonalDecomposition().solve(rhs);
  sol.primal = u.head(n);
  sol.eq_duals = u.tail(me);
  sol.kkt_residuals = residuals_at(p, sol.primal, sol.eq_duals, sol.ineq_duals);
  sol.objective = p.objective_value(sol.primal);
  if (sol.kkt_residuals.max() <= opts.tol) {
    sol.status = SolveStatus::optimal;
  } else if (sol.kkt_residuals.primal_feas > opts.tol) {
    sol.status = SolveStatus::infeasible;
  } else {
    sol.status = SolveStatus::unbounded;
  }
  return sol;
}

SolverSolution solve_impl(const StandardFormProgram& p,
                          const SolverOptions& opts, bool allow_diagnosis) {
  p.validate();
  const int n = p.num_vars();
  const int me = p.num_eq();
  const int mi = p.num_ineq();
  if (mi == 0) return solve_direct(p, opts);

  SpMat G = p.ineq_matrix;
  SpMat Gt = G.transpose();
  SpMat A = p.eq_matrix;
  const Vec& c = p.linear_cost;
  const Vec& b = p.eq_rhs;
  const Vec& h = p.ineq_rhs;
  SpMat Q(n, n);
  if (has_quadratic(p)) Q = p.quadratic_term;

  Iterate cur;
  int iters = 0;
  {
    // Initial point: one KKT solve with unit inequality scaling, then the
    // slack/dual candidates are shifted into the positive orthant.
    SpMat H = Q + SpMat(Gt * G);
    KktSolver kkt;
    if (!kkt.factorize(H, A)) {
      // fall back to a bland but safe start
      cur.x = Vec::Zero(n);
      cur.y = Vec::Zero(me);
      cur.s = Vec::Ones(mi);
      cur.z = Vec::Ones(mi);
    } else {
      Vec rhs(n + me);
      rhs.head(n) = -c + Gt * h;
      if (me > 0) rhs.tail(me) = b;
      Vec u = kkt.solve(rhs);
      cur.x = u.head(n);
      cur.y = u.tail(me);
      Vec st = h - G * cur.x;
      double mn = st.minCoeff();
      cur.s = (mn <= 0.0) ? Vec(st.array() + (1.0 - mn)) : st;
      Vec zt = -st;
      mn = zt.minCoeff();
      cur.z = (mn <= 0.0) ? Vec(zt.array() + (1.0 - mn)) : zt;
      if (!cur.x.allFinite() || !cur.s.allFinite() || !cur.z.allFinite()) {
        cur.x = Vec::Zero(n);
        cur.y = Vec::Zero(me);
        cur.s = Vec::Ones(mi);
        cur.z = Vec::Ones(mi);
      }
    }
  }

  const double exit_eps = std::max(0.05 * opts.tol, 1e-13);
  Iterate best = cur;
  double best_score = kInf;
  double prev_mu = kInf;
  int stall_count = 0;

  for (iters = 0; iters < opts.max_iters; ++iters) {
    Vec rd = quad_times(p, cur.x) + c + Gt * cur.z;
    if (me > 0) rd += A.transpose() * cur.y;
    Vec re = me > 0 ? Vec(A * cur.x - b) : Vec(0);
    Vec ri = G * cur.x + cur.s - h;
    const double mu = cur.s.dot(cur.z) / mi;
    const double comp_max = (cur.s.array() * cur.z.array()).abs().maxCoeff();
    const double score =
        std::max({inf_norm(rd), inf_norm(re), inf_norm(ri), comp_max});
    if (score < best_score) {
      best_score = score;
      best = cur;
    }
    if (score <= exit_eps) break;
    if (!std::isfinite(score) || mu > 1e32) break;
    if (mu > 0.95 * prev_mu) {
      if (++stall_count >= 4) break;
    } else {
      stall_count = 0;
    }
    prev_mu = mu;

    Vec w = cur.z.cwiseQuotient(cur.s);
    SpMat WG = w.asDiagonal() * G;
    SpMat H = Q + SpMat(Gt * WG);
    KktSolver kkt;
    if (!kkt.factorize(H, A)) break;

    auto direction = [&](const Vec& rsz, Vec& dx, Vec& dy, Vec& ds, Vec& dz) {
      Vec tmp = (cur.z.array() * ri.array() - rsz.array()) / cur.s.array();
      Vec rhs(n + me);
      rhs.head(n) = -rd - Gt * tmp;
      if (me > 0) rhs.tail(me) = -re;
      Vec u = kkt.solve(rhs);
      dx = u.head(n);
      dy = u.tail(me);
      ds = -ri - G * dx;
      dz = (-rsz.array() - cur.z.array() * ds.array()) / cur.s.array();
    };
    auto max_step = [](const Vec& v, const Vec& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
      return a;
    };

    // predictor
    Vec rsz_aff = cur.s.cwiseProduct(cur.z);
    Vec dx, dy, ds, dz;
    direction(rsz_aff, dx, dy, ds, dz);
    const double ap_aff = max_step(cur.s, ds);
    const double ad_aff = max_step(cur.z, dz);
    const double mu_aff = (cur.s + ap_aff * ds).dot(cur.z + ad_aff * dz) / mi;
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3);
    sigma = std::clamp(sigma, 1e-8, 1.0 - 1e-8);

    // corrector
    Vec rsz = rsz_aff + ds.cwiseProduct(dz) -
              Vec::Constant(mi, sigma * mu);
    direction(rsz, dx, dy, ds, dz);
    const double tau = 0.995;
    const double ap = std::min(1.0, tau * max_step(cur.s, ds));
    const double ad = std::min(1.0, tau * max_step(cur.z, dz));
    cur.x += ap * dx;
    cur.s += ap * ds;
    cur.y += ad * dy;
    cur.z += ad * dz;
    if (!cur.x.allFinite() || !cur.s.allFinite() || !cur.z.allFinite()) {
      cur = best;
      break;
    }
  }

  {
    Vec rd = quad_times(p, cur.x) + c + Gt * cur.z;
    if (me > 0) rd += A.transpose() * cur.y;
    Vec re = me > 0 ? Vec(A * cur.x - b) : Vec(0);
    Vec ri = G * cur.x + cur.s - h;
    const double comp_max = (cur.s.array() * cur.z.array()).abs().maxCoeff();
    const double score =
        std::max({inf_norm(rd), inf_norm(re), inf_norm(ri), comp_max});
    if (score > best_score) cur = best;
  }

  if (opts.polish) {
    Iterate cand = cur;
    if (polish(p, cand)) {
      KktResiduals before = residuals_at(p, cur.x, cur.y, cur.z);
      KktResiduals after = residuals_at(p, cand.x, cand.y, cand.z);
      if (after.max() <= before.max()) cur = cand;
    }
  }

  return classify_and_pack(p, opts, cur, iters, allow_diagnosis);
}

// Recession-direction test for LPs: min c'd over Ad=0, Gd<=0, |d|<=1.
bool lp_unbounded(const StandardFormProgram& p, const SolverOptions& opts) {
  if (has_quadratic(p)) return false;
  const int n = p.num_vars();
  StandardFormProgram rec;
  rec.linear_cost = p.linear_cost;
  rec.eq_matrix = p.eq_matrix;
  rec.eq_rhs = Vec::Zero(p.num_eq());
  std::vector<Triplet> trips;
  const int mi = p.num_ineq();
  for (int k = 0; k < p.ineq_matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.ineq_matrix, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(mi + i, i, 1.0);
    trips.emplace_back(mi + n + i, i, -1.0);
  }
  SpMat Gr(mi + 2 * n, n);
  Gr.setFromTriplets(trips.begin(), trips.end());
  rec.ineq_matrix = Gr;
  rec.ineq_rhs = Vec::Zero(mi + 2 * n);
  rec.ineq_rhs.tail(2 * n).setOnes();
  SolverOptions ro = opts;
  ro.polish = true;
  SolverSolution sol = solve_impl(rec, ro, false);
  if (sol.status != SolveStatus::optimal) return false;
  return sol.objective < -1e-7 * (1.0 + inf_norm(p.linear_cost));
}

SolverSolution classify_and_pack(const StandardFormProgram& p,
                                 const SolverOptions& opts, Iterate it,
                                 int iters, bool allow_diagnosis) {
  SolverSolution sol;
  sol.primal = it.x;
  sol.eq_duals = it.y;
  sol.ineq_duals = it.z.cwiseMax(0.0);
  sol.objective = p.objective_value(it.x);
  sol.iterations = iters;
  sol.kkt_residuals = residuals_at(p, sol.primal, sol.eq_duals, sol.ineq_duals);
  if (sol.kkt_residuals.max() <= opts.tol) {
    sol.status = SolveStatus::optimal;
    return sol;
  }
  sol.status = SolveStatus::max_iters;
  if (allow_diagnosis) {
    const double feas = measure_infeasibility(p, opts);
    const double feas_tol =
        1e-6 * (1.0 + inf_norm(p.eq_rhs) + inf_norm(p.ineq_rhs));
    if (feas > feas_tol) {
      sol.status = SolveStatus::infeasible;
    } else if (lp_unbounded(p, opts)) {
      sol.status = SolveStatus::unbounded;
    }
  }
  return sol;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::max_iters:
      return "max_iters";
  }
  return "unknown";
}

void StandardFormProgram::validate() const {
  const int n = num_vars();
  if (quadratic_term.rows() != quadratic_term.cols())
    throw DimensionMismatch("quadratic_term must be square");
  if (quadratic_term.rows() != 0 && quadratic_term.rows() != n)
    throw DimensionMismatch("quadratic_term dimension does not match cost");
  if (eq_matrix.rows() != eq_rhs.size())
    throw DimensionMismatch("eq_matrix rows != eq_rhs size");
  if (eq_matrix.rows() > 0 && eq_matrix.cols() != n)
    throw DimensionMismatch("eq_matrix cols != num vars");
  if (ineq_matrix.rows() != ineq_rhs.size())
    throw DimensionMismatch("ineq_matrix rows != ineq_rhs size");
  if (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n)
    throw DimensionMismatch("ineq_matrix cols != num vars");
  if (quadratic_term.nonZeros() > 0) {
    SpMat diff = SpMat(quadratic_term.transpose()) - quadratic_term;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SpMat::InnerIterator it(diff, k); it; ++it)
        if (std::abs(it.value()) > 1e-12)
          throw DimensionMismatch("quadratic_term is not symmetric");
  }
}

double StandardFormProgram::objective_value(const Vec& x) const {
  double v = linear_cost.dot(x);
  if (quadratic_term.nonZeros() > 0) v += 0.5 * x.dot(quadratic_term * x);
  return v;
}

double KktResiduals::max() const {
  return std::max({stationarity, primal_feas, dual_feas, complementarity});
}

SolverSolution solve(const StandardFormProgram& program,
                     const SolverOptions& options) {
  return solve_impl(program, options, true);
}

KktResiduals verify_kkt(const StandardFormProgram& program,
                        const SolverSolution& solution) {
  program.validate();
  if (solution.primal.size() != program.num_vars() ||
      solution.eq_duals.size() != program.num_eq() ||
      solution.ineq_duals.size() != program.num_ineq())
    throw DimensionMismatch("solution dimensions do not match program");
  return residuals_at(program, solution.primal, solution.eq_duals,
                      solution.ineq_duals);
}

double dual_objective(const StandardFormProgram& program,
                      const SolverSolution& solution) {
  double v = 0.0;
  if (program.quadratic_term.nonZeros() > 0)
    v -= 0.5 * solution.primal.dot(program.quadratic_term * solution.primal);
  if (program.num_eq() > 0) v -= program.eq_rhs.dot(solution.eq_duals);
  if (program.num_ineq() > 0) v -= program.ineq_rhs.dot(solution.ineq_duals);
  return v;
}

double measure_infeasibility(const StandardFormProgram& program,
                             const SolverOptions& options) {
  program.validate();
  const int n = program.num_vars();
  const int me = program.num_eq();
  const int mi = program.num_ineq();
  // variables [x; t_e; t_i], all relaxations nonnegative
  StandardFormProgram relax;
  relax.linear_cost = Vec::Zero(n + me + mi);
  relax.linear_cost.tail(me + mi).setOnes();
  relax.eq_matrix = SpMat(0, n + me + mi);
  relax.eq_rhs = Vec::Zero(0);
  std::vector<Triplet> trips;
  int row = 0;
  for (int k = 0; k < program.eq_matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(program.eq_matrix, k); it; ++it) {
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
      trips.emplace_back(me + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), -it.value());
    }
  for (int i = 0; i < me; ++i) {
    trips.emplace_back(i, n + i, -1.0);
    trips.emplace_back(me + i, n + i, -1.0);
  }
  row = 2 * me;
  for (int k = 0; k < program.ineq_matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(program.ineq_matrix, k); it; ++it)
      trips.emplace_back(row + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
  for (int i = 0; i < mi; ++i) trips.emplace_back(row + i, n + me + i, -1.0);
  row += mi;
  for (int i = 0; i < me + mi; ++i)
    trips.emplace_back(row + i, n + i, -1.0);
  SpMat Gr(row + me + mi, n + me + mi);
  Gr.setFromTriplets(trips.begin(), trips.end());
  relax.ineq_matrix = Gr;
  relax.ineq_rhs = Vec::Zero(row + me + mi);
  if (me > 0) {
    relax.ineq_rhs.head(me) = program.eq_rhs;
    relax.ineq_rhs.segment(me, me) = -program.eq_rhs;
  }
  if (mi > 0) relax.ineq_rhs.segment(2 * me, mi) = program.ineq_rhs;

  SolverOptions ro = options;
  ro.polish = true;
  SolverSolution sol = solve_impl(relax, ro, false);
  return std::max(0.0, sol.objective);
}

namespace {

void dump_sparse(std::ostream& os, const std::string& name, const SpMat& m) {
  os << "%% block: " << name << "\n";
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  char buf[64];
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n",
                    static_cast<int>(it.row()) + 1,
                    static_cast<int>(it.col()) + 1, it.value());
      os << buf;
    }
}

void dump_dense(std::ostream& os, const std::string& name, const Vec& v) {
  os << "%% block: " << name << "\n";
  os << "%%MatrixMarket matrix array real general\n";
  os << v.size() << " 1\n";
  char buf[64];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v[i]);
    os << buf;
  }
}

}  // namespace

void dump_program(const StandardFormProgram& program, std::ostream& os) {
  dump_sparse(os, "quadratic_term", program.quadratic_term);
  dump_dense(os, "linear_cost", program.linear_cost);
  dump_sparse(os, "eq_matrix", program.eq_matrix);
  dump_dense(os, "eq_rhs", program.eq_rhs);
  dump_sparse(os, "ineq_matrix", program.ineq_matrix);
  dump_dense(os, "ineq_rhs", program.ineq_rhs);
  if (!program.variable_names.empty()) {
    os << "%% block: variable_names\n";
    for (const auto& n : program.variable_names) os << n << "\n";
  }
}

void dump_program_to_file(const StandardFormProgram& program,
                          const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open program dump file: " + path);
  dump_program(program, f);
}

}  // namespace drcal
