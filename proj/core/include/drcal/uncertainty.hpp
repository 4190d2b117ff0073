#pragma once

#include <vector>

#include "drcal/dataset.hpp"
#include "drcal/linalg.hpp"

namespace drcal {

/// Per-farm historical forecast errors with bounded support and the
/// Wasserstein radii that size the ambiguity set.
struct EmpiricalErrorModel {
  Mat errors;    // n_wind x N_s, MW
  Vec xi_lower;  // MW per farm
  Vec xi_upper;  // MW per farm
  Vec epsilon;   // radius per farm; empty until prescribed
  double risk_level = 0.05;  // chance-constraint violation budget, in (0,1)

  int n_wind() const { return static_cast<int>(errors.rows()); }
  int n_samples() const { return static_cast<int>(errors.cols()); }
  bool epsilon_set() const { return epsilon.size() == n_wind(); }

  /// Throws ValidationError; an unset epsilon is allowed.
  void validate() const;
};

struct ErrorModelOptions {
  double xi_lower = -50.0;  // MW
  double xi_upper = 50.0;   // MW
  double risk_level = 0.05;
  /// Errors outside the support are clamped; a warning is logged to stderr.
  bool warn_on_clamp = true;
};

/// Residuals y - theta' x over a UQ dataset, clamped into the configured
/// support. theta is feature-dim x n_wind; epsilon is left unset.
EmpiricalErrorModel empirical_errors(const Mat& theta, const Dataset& uq_data,
                                     const ErrorModelOptions& options = {});

/// Order-1 Wasserstein distance between two equal-weight empirical measures
/// of equal size. Throws EmptyInput / DimensionMismatch.
double wasserstein_1d(std::vector<double> samples_a,
                      std::vector<double> samples_b);

}  // namespace drcal
