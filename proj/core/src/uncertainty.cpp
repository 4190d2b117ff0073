#include "drcal/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "drcal/errors.hpp"

namespace drcal {

void EmpiricalErrorModel::validate() const {
  if (xi_lower.size() != n_wind() || xi_upper.size() != n_wind())
    throw ValidationError("support bounds have wrong length");
  for (int j = 0; j < n_wind(); ++j) {
    if (xi_lower[j] > xi_upper[j])
      throw ValidationError("farm " + std::to_string(j + 1) +
                            ": xi_lower exceeds xi_upper");
    for (int i = 0; i < n_samples(); ++i)
      if (errors(j, i) < xi_lower[j] || errors(j, i) > xi_upper[j])
        throw ValidationError("farm " + std::to_string(j + 1) +
                              ": stored error outside support bounds");
  }
  if (epsilon.size() != 0) {
    if (epsilon.size() != n_wind())
      throw ValidationError("epsilon has wrong length");
    if (epsilon.minCoeff() < 0)
      throw ValidationError("epsilon must be nonnegative");
  }
  if (!(risk_level > 0.0 && risk_level < 1.0))
    throw ValidationError("risk_level must lie in (0, 1)");
}

EmpiricalErrorModel empirical_errors(const Mat& theta, const Dataset& uq_data,
                                     const ErrorModelOptions& options) {
  if (uq_data.role != DatasetRole::uq)
    throw ValidationError("empirical_errors requires a dataset with role=uq");
  if (theta.rows() != uq_data.features.cols())
    throw DimensionMismatch("theta feature dimension does not match dataset");
  if (theta.cols() != uq_data.actuals.cols())
    throw DimensionMismatch("theta wind dimension does not match dataset");

  const int nw = static_cast<int>(theta.cols());
  const int ns = uq_data.num_samples();
  EmpiricalErrorModel m;
  m.errors = Mat(nw, ns);
  m.xi_lower = Vec::Constant(nw, options.xi_lower);
  m.xi_upper = Vec::Constant(nw, options.xi_upper);
  m.risk_level = options.risk_level;
  int clamped = 0;
  for (int j = 0; j < nw; ++j)
    for (int i = 0; i < ns; ++i) {
      double e = uq_data.actuals(i, j) - theta.col(j).dot(uq_data.features.row(i));
      if (e < options.xi_lower || e > options.xi_upper) {
        e = std::clamp(e, options.xi_lower, options.xi_upper);
        ++clamped;
      }
      m.errors(j, i) = e;
    }
  if (clamped > 0 && options.warn_on_clamp)
    std::cerr << "warning: clamped " << clamped
              << " forecast error(s) into the support bounds [" << options.xi_lower
              << ", " << options.xi_upper << "] MW\n";
  m.validate();
  return m;
}

double wasserstein_1d(std::vector<double> samples_a,
                      std::vector<double> samples_b) {
  if (samples_a.empty() || samples_b.empty())
    throw EmptyInput("wasserstein_1d: empty sample list");
  if (samples_a.size() != samples_b.size())
    throw DimensionMismatch("wasserstein_1d: sample lists differ in length");
  std::sort(samples_a.begin(), samples_a.end());
  std::sort(samples_b.begin(), samples_b.end());
  double total = 0.0;
  for (size_t i = 0; i < samples_a.size(); ++i)
    total += std::abs(samples_a[i] - samples_b[i]);
  return total / static_cast<double>(samples_a.size());
}

}  // namespace drcal
