#include "drcal/run_writer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drcal/errors.hpp"

namespace drcal {

using json = nlohmann::json;

void write_trajectory_csv(const std::string& path,
                          const CalibrationState& state) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  const int nw = static_cast<int>(state.epsilon.size());
  const int nf = static_cast<int>(state.theta.rows());
  f << "iter,mse,task1,task2,total";
  for (int j = 0; j < nw; ++j) f << ",eps_" << (j + 1);
  for (int j = 0; j < nw; ++j)
    for (int r = 0; r < nf; ++r) f << ",theta_" << (r + 1) << "_" << (j + 1);
  f << "\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    f << "," << buf;
  };
  for (size_t t = 0; t < state.loss_history.size(); ++t) {
    const LossBreakdown& b = state.loss_history[t];
    f << (t + 1);
    put(b.mse);
    put(b.task1);
    put(b.task2);
    put(b.total);
    const Vec& eps = state.epsilon_trajectory[t];
    for (int j = 0; j < nw; ++j) put(eps[j]);
    const Mat& th = state.theta_trajectory[t];
    for (int j = 0; j < nw; ++j)
      for (int r = 0; r < nf; ++r) put(th(r, j));
    f << "\n";
  }
  if (!f) throw IoError("failed writing " + path);
}

void write_final_json(const std::string& path, const CalibrationState& state) {
  json doc;
  doc["converged"] = state.converged;
  doc["iterations"] = state.iter;
  doc["epsilon"] = std::vector<double>(state.epsilon.data(),
                                       state.epsilon.data() + state.epsilon.size());
  json theta = json::array();
  for (int j = 0; j < state.theta.cols(); ++j) {
    json col = json::array();
    for (int r = 0; r < state.theta.rows(); ++r) col.push_back(state.theta(r, j));
    theta.push_back(col);
  }
  doc["theta"] = theta;
  if (!state.loss_history.empty()) {
    const LossBreakdown& b = state.loss_history.back();
    doc["final_loss"] = {{"mse", b.mse},
                         {"task1", b.task1},
                         {"task2", b.task2},
                         {"total", b.total}};
  }
  doc["stop_delta"] = state.resolved_stop_delta;
  write_text_file(path, doc.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace drcal
