#pragma once

#include <string>

#include "drcal/calibrate.hpp"

namespace drcal {

/// trajectory.csv: iter, mse, task1, task2, total, eps_1..W, theta flattened
/// (column-major: theta_1_1..theta_F_1, theta_1_2..), one row per iteration.
void write_trajectory_csv(const std::string& path,
                          const CalibrationState& state);

/// final.json: calibrated theta, epsilon, converged flag, iteration count.
void write_final_json(const std::string& path, const CalibrationState& state);

/// config.json from an already-serialized JSON text (resolved configuration).
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace drcal
