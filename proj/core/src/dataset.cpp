#include "drcal/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "drcal/errors.hpp"
#include "drcal/rng.hpp"

namespace drcal {

const char* to_string(DatasetRole r) {
  return r == DatasetRole::uq ? "uq" : "calibration";
}

void Dataset::validate(const Vec& capacity) const {
  if (features.rows() != actuals.rows())
    throw ValidationError("features and actuals have different sample counts");
  if (capacity.size() > 0) {
    if (capacity.size() != actuals.cols())
      throw ValidationError("capacity length does not match wind farms");
    for (int i = 0; i < actuals.rows(); ++i)
      for (int w = 0; w < actuals.cols(); ++w)
        if (actuals(i, w) < 0.0 || actuals(i, w) > capacity[w])
          throw ValidationError("actual power outside [0, capacity] at sample " +
                                std::to_string(i + 1) + ", farm " +
                                std::to_string(w + 1));
  }
}

Dataset gen_synthetic_dataset(const Mat& theta0, int n, double sigma,
                              std::uint64_t seed, DatasetRole role,
                              const SyntheticOptions& options) {
  if (n < 1) throw ValidationError("sample count must be >= 1");
  if (sigma < 0) throw ValidationError("sigma must be >= 0");
  const int nf = static_cast<int>(theta0.rows());
  const int nw = static_cast<int>(theta0.cols());
  Vec cap = options.capacity;
  if (cap.size() == 1 && nw > 1) cap = Vec::Constant(nw, cap[0]);
  if (cap.size() != nw)
    throw DimensionMismatch("capacity length does not match theta0 columns");

  Rng rng(seed);
  Dataset d;
  d.role = role;
  d.features = Mat(n, nf);
  d.actuals = Mat(n, nw);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < nf; ++f)
      d.features(i, f) = rng.uniform(options.feature_min, options.feature_max);
    for (int w = 0; w < nw; ++w) {
      double y = theta0.col(w).dot(d.features.row(i));
      if (sigma > 0) y += rng.normal(0.0, sigma);
      d.actuals(i, w) = std::clamp(y, 0.0, cap[w]);
    }
  }
  return d;
}

Dataset load_dataset_csv(const std::string& path, DatasetRole role) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(f, line)) throw ParseError("empty dataset file: " + path);
  int nf = 0, nw = 0;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (!col.empty() && col.front() == 'x')
        ++nf;
      else if (!col.empty() && col.front() == 'y')
        ++nw;
      else
        throw ParseError("dataset header must contain x1..xF,y1..yW columns");
    }
  }
  if (nf == 0 || nw == 0)
    throw ParseError("dataset header must contain x and y columns");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": not a number: '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != nf + nw)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected " + std::to_string(nf + nw) + " columns");
    rows.push_back(std::move(row));
  }
  Dataset d;
  d.role = role;
  d.features = Mat(rows.size(), nf);
  d.actuals = Mat(rows.size(), nw);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < nf; ++j) d.features(i, j) = rows[i][j];
    for (int j = 0; j < nw; ++j) d.actuals(i, j) = rows[i][nf + j];
  }
  d.validate();
  return d;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write dataset file: " + path);
  for (int j = 0; j < data.num_features(); ++j) {
    if (j) f << ",";
    f << "x" << (j + 1);
  }
  for (int j = 0; j < data.num_wind(); ++j) f << ",y" << (j + 1);
  f << "\n";
  char buf[64];
  for (int i = 0; i < data.num_samples(); ++i) {
    for (int j = 0; j < data.num_features(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.features(i, j));
      if (j) f << ",";
      f << buf;
    }
    for (int j = 0; j < data.num_wind(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.actuals(i, j));
      f << "," << buf;
    }
    f << "\n";
  }
  if (!f) throw IoError("failed writing dataset file: " + path);
}

}  // namespace drcal
