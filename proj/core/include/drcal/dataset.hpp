#pragma once

#include <cstdint>
#include <string>

#include "drcal/linalg.hpp"

namespace drcal {

enum class DatasetRole { uq, calibration };

const char* to_string(DatasetRole r);

/// Feature/actual sample pairs. features is samples x feature-dim, actuals is
/// samples x n_wind (MW). Immutable after construction.
struct Dataset {
  Mat features;
  Mat actuals;
  DatasetRole role = DatasetRole::uq;

  int num_samples() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }
  int num_wind() const { return static_cast<int>(actuals.cols()); }

  /// Throws ValidationError on mismatched sample counts or actuals outside
  /// [0, capacity] when capacities are supplied (empty = skip that check).
  void validate(const Vec& capacity = Vec()) const;
};

struct SyntheticOptions {
  double feature_min = 0.0;
  /// Default maps the bundled case's theta0 = [1, 2] onto forecasts spanning
  /// exactly [0, 200] MW, the bundled wind capacity.
  double feature_max = 200.0 / 3.0;
  /// Per-farm clip ceiling for actuals; scalar broadcast if size 1.
  Vec capacity = Vec::Constant(1, 200.0);
};

/// Draws features uniformly, forms actuals theta0' x plus N(0, sigma^2)
/// noise, and clips them into [0, capacity]. Bit-reproducible for a fixed
/// seed. theta0 is feature-dim x n_wind.
Dataset gen_synthetic_dataset(const Mat& theta0, int n, double sigma,
                              std::uint64_t seed, DatasetRole role,
                              const SyntheticOptions& options = {});

/// CSV with header x1,...,xF,y1,...,yW; one row per sample.
Dataset load_dataset_csv(const std::string& path, DatasetRole role);
void save_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace drcal
