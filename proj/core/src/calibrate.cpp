#include "drcal/calibrate.hpp"

#include <cmath>
#include <string>

#include "drcal/errors.hpp"

namespace drcal {

void CalibrationConfig::validate() const {
  if (!(lr_theta >= 0.0) || !(lr_eps >= 0.0))
    throw ValidationError("learning rates must be nonnegative");
  if (!std::isnan(stop_delta) && !(stop_delta > 0.0))
    throw ValidationError("stop_delta must be positive (or NaN for the default rule)");
  if (max_iters < 0) throw ValidationError("max_iters must be >= 0");
  if (eps_floor < 0.0) throw ValidationError("eps_floor must be >= 0");
}

Vec forecast_series(const Vec& theta_col, const Mat& features) {
  const int n = static_cast<int>(features.rows());
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = theta_col.dot(features.row(i));
  return out;
}

Vec raw_forecast_errors(const Vec& theta_col, const Mat& features,
                        const Vec& actuals_col) {
  Vec out = forecast_series(theta_col, features);
  for (int i = 0; i < out.size(); ++i) out[i] = actuals_col[i] - out[i];
  return out;
}

double mse_from_forecasts(const Mat& actuals, const Mat& forecasts) {
  const int n = static_cast<int>(actuals.rows());
  const int w = static_cast<int>(actuals.cols());
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < w; ++j) {
      const double r = actuals(i, j) - forecasts(i, j);
      acc += r * r;
    }
  return acc / n;
}

Vec theta_column_gradient(const Mat& features, const Vec& actuals_col,
                          const Vec& theta_col, const Vec& dldy_col,
                          double eta) {
  const int n = static_cast<int>(features.rows());
  const int nf = static_cast<int>(features.cols());
  Vec task = Vec::Zero(nf);
  Vec mse = Vec::Zero(nf);
  for (int i = 0; i < n; ++i) {
    const double resid = theta_col.dot(features.row(i)) - actuals_col[i];
    for (int f = 0; f < nf; ++f) {
      task[f] += dldy_col[i] * features(i, f);
      mse[f] += 2.0 * resid * features(i, f);
    }
  }
  return task / n + eta * (mse / n);
}

Vec epsilon_update(const Vec& epsilon, const Vec& grad, double lr,
                   double eps_floor) {
  return (epsilon - lr * grad).cwiseMax(eps_floor);
}

double mse_loss(const Mat& theta, const Dataset& cal_data) {
  if (cal_data.num_samples() == 0)
    throw EmptyDataset("mse_loss: dataset has no samples");
  if (theta.rows() != cal_data.features.cols() ||
      theta.cols() != cal_data.actuals.cols())
    throw DimensionMismatch("mse_loss: theta does not match dataset");
  Mat forecasts(cal_data.num_samples(), theta.cols());
  for (int j = 0; j < theta.cols(); ++j)
    forecasts.col(j) = forecast_series(theta.col(j), cal_data.features);
  return mse_from_forecasts(cal_data.actuals, forecasts);
}

Mat mse_grad(const Mat& theta, const Dataset& cal_data) {
  if (theta.rows() != cal_data.features.cols() ||
      theta.cols() != cal_data.actuals.cols())
    throw DimensionMismatch("mse_grad: theta does not match dataset");
  const int n = cal_data.num_samples();
  Mat grad = Mat::Zero(theta.rows(), theta.cols());
  for (int j = 0; j < theta.cols(); ++j) {
    Vec col = Vec::Zero(theta.rows());
    for (int i = 0; i < n; ++i) {
      const double resid =
          theta.col(j).dot(cal_data.features.row(i)) - cal_data.actuals(i, j);
      for (int f = 0; f < theta.rows(); ++f)
        col[f] += 2.0 * resid * cal_data.features(i, f);
    }
    grad.col(j) = col / n;
  }
  return grad;
}

std::pair<double, double> task_losses(
    const std::vector<ScheduleSolution>& schedule_solutions,
    const std::vector<DispatchSolution>& dispatch_solutions) {
  if (schedule_solutions.size() != dispatch_solutions.size())
    throw LengthMismatch("task_losses: one dispatch per schedule required");
  if (schedule_solutions.empty())
    throw LengthMismatch("task_losses: no samples");
  double t1 = 0.0, t2 = 0.0;
  for (size_t i = 0; i < schedule_solutions.size(); ++i) {
    t1 += schedule_solutions[i].objective_stage1;
    t2 += dispatch_solutions[i].cost;
  }
  const double n = static_cast<double>(schedule_solutions.size());
  return {t1 / n, t2 / n};
}

SampleEvaluation evaluate_sample(const NetworkCase& grid,
                                 const EmpiricalErrorModel& uq,
                                 const Vec& forecast, const Vec& actual,
                                 const LayerConfig& layer,
                                 const DispatchOptions& dispatch) {
  auto [sched, jac] = schedule_jacobians(grid, forecast, uq, layer);
  DispatchSolution disp = solve_dispatch(grid, sched, actual, dispatch);
  DispatchPartials partials = dispatch_value_partials(disp, grid);

  // weight on dG: stage-one costs C = (c_g, c_r, c_r) plus the envelope
  // partials of the stage-two value
  const int ng = grid.n_generators;
  Vec w(3 * ng);
  w << grid.cost_energy, grid.cost_reserve, grid.cost_reserve;
  w += partials.stacked();

  SampleEvaluation ev;
  ev.d_loss_d_yhat = jac.dG_dyhat.transpose() * w;
  ev.d_loss_d_eps = jac.dG_deps.transpose() * w;
  ev.task1 = sched.objective_stage1;
  ev.task2 = disp.cost;
  return ev;
}

TotalGradients total_grads(const CalibrationState& state,
                           const NetworkCase& grid,
                           const EmpiricalErrorModel& uq,
                           const Dataset& cal_data,
                           const CalibrationConfig& config) {
  if (!uq.epsilon_set())
    throw UnsetEpsilon("total_grads: error model has no epsilon");
  const int n = cal_data.num_samples();
  const int nw = grid.n_wind;
  if (n == 0) throw EmptyDataset("total_grads: dataset has no samples");

  Mat forecasts(n, nw);
  for (int j = 0; j < nw; ++j)
    forecasts.col(j) = forecast_series(state.theta.col(j), cal_data.features);

  Mat dldy(n, nw);
  Vec dlde_sum = Vec::Zero(nw);
  double t1 = 0.0, t2 = 0.0;
  for (int i = 0; i < n; ++i) {
    try {
      SampleEvaluation ev =
          evaluate_sample(grid, uq, forecasts.row(i).transpose(),
                          cal_data.actuals.row(i).transpose(), config.layer,
                          config.dispatch);
      dldy.row(i) = ev.d_loss_d_yhat.transpose();
      dlde_sum += ev.d_loss_d_eps;
      t1 += ev.task1;
      t2 += ev.task2;
    } catch (const InfeasibleSchedule& e) {
      throw InfeasibleSchedule("sample " + std::to_string(i + 1) + ": " +
                               e.what());
    } catch (const InfeasibleDispatch& e) {
      throw InfeasibleDispatch(
          "sample " + std::to_string(i + 1) + ": " + e.what(), e.unmet_mw());
    } catch (const SingularKKT& e) {
      throw SingularKKT("sample " + std::to_string(i + 1) + ": " + e.what(),
                        e.cond_estimate());
    }
  }

  TotalGradients out;
  out.breakdown.task1 = t1 / n;
  out.breakdown.task2 = t2 / n;
  out.breakdown.mse = mse_from_forecasts(cal_data.actuals, forecasts);
  out.breakdown.total = out.breakdown.task1 + out.breakdown.task2 +
                        config.eta * out.breakdown.mse;
  out.d_theta = Mat(state.theta.rows(), nw);
  for (int j = 0; j < nw; ++j)
    out.d_theta.col(j) =
        theta_column_gradient(cal_data.features, cal_data.actuals.col(j),
                              state.theta.col(j), dldy.col(j), config.eta);
  out.d_eps = dlde_sum / n;
  return out;
}

CalibrationState calibrate(const NetworkCase& grid, const Dataset& uq_data,
                           const Dataset& cal_data, const Mat& theta0,
                           const Vec& eps0, const CalibrationConfig& config) {
  config.validate();
  if (eps0.size() != grid.n_wind)
    throw DimensionMismatch("eps0 length does not match wind farms");
  if (eps0.minCoeff() < config.eps_floor)
    throw ValidationError("eps0 must be >= eps_floor");

  EmpiricalErrorModel uq = empirical_errors(theta0, uq_data, config.uq_options);

  CalibrationState state;
  state.theta = theta0;
  state.epsilon = eps0;
  state.resolved_stop_delta = config.stop_delta;

  double prev_total = std::numeric_limits<double>::quiet_NaN();
  for (int t = 0; t < config.max_iters; ++t) {
    uq.epsilon = state.epsilon;
    TotalGradients g = total_grads(state, grid, uq, cal_data, config);

    state.theta_trajectory.push_back(state.theta);
    state.epsilon_trajectory.push_back(state.epsilon);
    state.loss_history.push_back(g.breakdown);
    state.iter = t + 1;

    if (std::isnan(state.resolved_stop_delta))
      state.resolved_stop_delta =
          std::max(1e-5 * std::abs(g.breakdown.total), 1e-12);
    if (t >= 1 &&
        std::abs(g.breakdown.total - prev_total) < state.resolved_stop_delta) {
      state.converged = true;
      break;
    }
    prev_total = g.breakdown.total;

    if (!g.d_theta.allFinite() || !g.d_eps.allFinite())
      throw NonFiniteGradient("non-finite gradient at iteration " +
                              std::to_string(t + 1));
    for (int j = 0; j < grid.n_wind; ++j)
      state.theta.col(j) -= config.lr_theta * g.d_theta.col(j);
    state.epsilon =
        epsilon_update(state.epsilon, g.d_eps, config.lr_eps, config.eps_floor);
  }
  return state;
}

}  // namespace drcal
