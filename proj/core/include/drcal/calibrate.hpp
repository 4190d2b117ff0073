#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "drcal/dataset.hpp"
#include "drcal/diff.hpp"
#include "drcal/dispatch.hpp"
#include "drcal/network_case.hpp"
#include "drcal/uncertainty.hpp"

namespace drcal {

struct CalibrationConfig {
  double eta = 1.0;        // weight on the MSE loss
  double lr_theta = 1e-4;  // kappa_theta
  double lr_eps = 1e-3;    // kappa_eps
  /// Absolute loss-change stop threshold. NaN selects the default rule of
  /// 1e-5 times the initial total loss, resolved on the first iteration.
  double stop_delta = std::numeric_limits<double>::quiet_NaN();
  int max_iters = 100;
  double eps_floor = 0.0;
  LayerConfig layer;
  std::uint64_t seed = 0;
  ErrorModelOptions uq_options;  // support bounds and risk level
  DispatchOptions dispatch;      // stage-two policy (load shedding off by default)

  void validate() const;
};

struct LossBreakdown {
  double mse = 0.0;    // (MW)^2
  double task1 = 0.0;  // $, look-ahead energy + reserve procurement
  double task2 = 0.0;  // $, real-time adjustment
  double total = 0.0;  // task1 + task2 + eta * mse
};

struct CalibrationState {
  Mat theta;    // feature-dim x n_wind
  Vec epsilon;  // per farm
  int iter = 0;
  std::vector<LossBreakdown> loss_history;
  bool converged = false;

  // per-iteration parameter snapshots, taken at loss evaluation time
  std::vector<Mat> theta_trajectory;
  std::vector<Vec> epsilon_trajectory;
  double resolved_stop_delta = 0.0;
};

/// (1/N_c) sum_i ||y_i - theta' x_i||^2. Throws EmptyDataset.
double mse_loss(const Mat& theta, const Dataset& cal_data);

/// Exact analytic MSE gradient, (1/N_c) sum_i 2 (theta' x_i - y_i) x_i'.
Mat mse_grad(const Mat& theta, const Dataset& cal_data);

/// Mean stage-one procurement cost and mean dispatch cost over paired
/// per-sample solutions. Throws LengthMismatch.
std::pair<double, double> task_losses(
    const std::vector<ScheduleSolution>& schedule_solutions,
    const std::vector<DispatchSolution>& dispatch_solutions);

struct TotalGradients {
  Mat d_theta;  // like theta
  Vec d_eps;    // per farm
  LossBreakdown breakdown;
};

/// Full-batch gradients of the two-stage loss via the schedule jacobians and
/// the dispatch envelope partials, plus eta times the MSE gradient. The
/// error model must carry the current epsilon. Per-sample failures are
/// re-thrown with the sample index attached.
TotalGradients total_grads(const CalibrationState& state,
                           const NetworkCase& grid,
                           const EmpiricalErrorModel& uq,
                           const Dataset& cal_data,
                           const CalibrationConfig& config);

/// Gradient-descent calibration loop: forecast, schedule, differentiate,
/// dispatch, update theta and epsilon until |delta loss| < stop_delta or
/// max_iters. The empirical error model is built once from theta0 and held
/// fixed. Throws NonFiniteGradient and propagates per-sample errors.
CalibrationState calibrate(const NetworkCase& grid, const Dataset& uq_data,
                           const Dataset& cal_data, const Mat& theta0,
                           const Vec& eps0, const CalibrationConfig& config);

// ---- shared arithmetic kernels -------------------------------------------
// The distributed operator/agent pair reuses these so both execution modes
// produce bit-identical trajectories.

/// theta_col' x for every sample row; one dot product per sample.
Vec forecast_series(const Vec& theta_col, const Mat& features);

/// Raw (unclamped) forecast errors y - theta_col' x per sample.
Vec raw_forecast_errors(const Vec& theta_col, const Mat& features,
                        const Vec& actuals_col);

/// (1/N) sum_i ||y_i - yhat_i||^2 accumulated in sample order.
double mse_from_forecasts(const Mat& actuals, const Mat& forecasts);

/// Combined per-farm parameter gradient:
///   (1/N) sum_i dldy[i] x_i  +  eta (1/N) sum_i 2 (theta'x_i - y[i]) x_i.
Vec theta_column_gradient(const Mat& features, const Vec& actuals_col,
                          const Vec& theta_col, const Vec& dldy_col,
                          double eta);

/// Projected epsilon step: max(eps_floor, eps - lr * grad), elementwise.
Vec epsilon_update(const Vec& epsilon, const Vec& grad, double lr,
                   double eps_floor);

/// Forward/backward pass of one calibration sample: regularized schedule,
/// jacobians, dispatch, envelope partials.
struct SampleEvaluation {
  Vec d_loss_d_yhat;  // per farm
  Vec d_loss_d_eps;   // per farm
  double task1 = 0.0;
  double task2 = 0.0;
};
SampleEvaluation evaluate_sample(const NetworkCase& grid,
                                 const EmpiricalErrorModel& uq,
                                 const Vec& forecast, const Vec& actual,
                                 const LayerConfig& layer,
                                 const DispatchOptions& dispatch);

}  // namespace drcal
