// drcal: joint calibration of wind-power forecast parameters and decision
// conservativeness through a two-stage market (robust scheduling + real-time
// dispatch), with data generation, sweeps, and a distributed operator/agent
// mode.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "drcal/calibrate.hpp"
#include "drcal/dataset.hpp"
#include "drcal/distributed.hpp"
#include "drcal/errors.hpp"
#include "drcal/manifest.hpp"
#include "drcal/network_case.hpp"
#include "drcal/run_writer.hpp"
#include "drcal/solver.hpp"
#include "drcal/svg_plot.hpp"
#include "drcal/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace drcal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

Mat parse_theta(const std::string& text) {
  // columns separated by ';', entries by ','
  std::vector<std::vector<double>> cols;
  std::stringstream ss(text);
  std::string col;
  while (std::getline(ss, col, ';')) {
    std::vector<double> vals;
    std::stringstream cs(col);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("--theta0: not a number: '" + cell + "'");
      }
    }
    if (vals.empty()) throw ValidationError("--theta0: empty column");
    cols.push_back(std::move(vals));
  }
  if (cols.empty()) throw ValidationError("--theta0 must not be empty");
  const size_t nf = cols[0].size();
  for (const auto& c : cols)
    if (c.size() != nf)
      throw ValidationError("--theta0 columns must have equal length");
  Mat theta(nf, cols.size());
  for (size_t j = 0; j < cols.size(); ++j)
    for (size_t f = 0; f < nf; ++f) theta(f, j) = cols[j][f];
  return theta;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      vals.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": not a number: '" + cell +
                            "'");
    }
  }
  if (vals.empty())
    throw ValidationError(std::string(flag) + " must not be empty");
  return vals;
}

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += " ";
    out += argv[i];
  }
  return out;
}

json config_to_json(const CalibrationConfig& c) {
  json j;
  j["eta"] = c.eta;
  j["lr_theta"] = c.lr_theta;
  j["lr_eps"] = c.lr_eps;
  j["stop_delta"] = std::isnan(c.stop_delta) ? json() : json(c.stop_delta);
  j["max_iters"] = c.max_iters;
  j["eps_floor"] = c.eps_floor;
  j["seed"] = c.seed;
  j["layer"] = {{"regularization_rho", c.layer.regularization_rho},
                {"active_set_tol", c.layer.active_set_tol},
                {"fd_step", c.layer.fd_step},
                {"solver_tol", c.layer.solver.tol},
                {"solver_max_iters", c.layer.solver.max_iters}};
  j["uq"] = {{"xi_lower", c.uq_options.xi_lower},
             {"xi_upper", c.uq_options.xi_upper},
             {"risk_level", c.uq_options.risk_level}};
  j["load_shed_cost"] = c.dispatch.load_shed_cost;
  return j;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void write_loss_plots(const fs::path& dir, const CalibrationState& state) {
  std::vector<PlotSeries> losses(4);
  losses[0].name = "total";
  losses[1].name = "task1";
  losses[2].name = "task2";
  losses[3].name = "mse";
  for (const auto& b : state.loss_history) {
    losses[0].values.push_back(b.total);
    losses[1].values.push_back(b.task1);
    losses[2].values.push_back(b.task2);
    losses[3].values.push_back(b.mse);
  }
  write_svg_line_plot((dir / "loss_curve.svg").string(), "Loss convergence",
                      "iteration", "loss", losses);
  std::vector<PlotSeries> eps;
  const int nw =
      state.epsilon_trajectory.empty()
          ? 0
          : static_cast<int>(state.epsilon_trajectory.front().size());
  for (int j = 0; j < nw; ++j) {
    PlotSeries s;
    s.name = "eps_" + std::to_string(j + 1);
    for (const auto& e : state.epsilon_trajectory) s.values.push_back(e[j]);
    eps.push_back(std::move(s));
  }
  write_svg_line_plot((dir / "eps_trajectory.svg").string(),
                      "Ambiguity radius trajectory", "iteration", "epsilon",
                      eps);
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), size_t(0));
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    size_t i = 0;
    while (i < idx.size()) {
      size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (i + j) / 2.0 + 1.0;
      for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs), ry = ranks(ys);
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0 || dy == 0) return 0.0;
  return num / std::sqrt(dx * dy);
}

// ---- subcommand state -------------------------------------------------

struct GenDataArgs {
  std::string theta0 = "1,2";
  int n = 20;
  double sigma = 10.0;
  std::uint64_t seed = 1;
  std::string role = "uq";
  std::string out;
  double capacity = 200.0;
  double x_min = 0.0;
  double x_max = 200.0 / 3.0;
};

int run_gen_data(const GenDataArgs& a, const std::string& cmdline) {
  Stopwatch watch;
  if (a.role != "uq" && a.role != "calibration")
    throw ValidationError("--role must be uq or calibration");
  Mat theta0 = parse_theta(a.theta0);
  SyntheticOptions opt;
  opt.feature_min = a.x_min;
  opt.feature_max = a.x_max;
  opt.capacity = Vec::Constant(theta0.cols(), a.capacity);
  Dataset d = gen_synthetic_dataset(
      theta0, a.n, a.sigma, a.seed,
      a.role == "uq" ? DatasetRole::uq : DatasetRole::calibration, opt);
  save_dataset_csv(d, a.out);

  RunManifest m;
  m.command_line = cmdline;
  json cfg{{"theta0", a.theta0}, {"n", a.n},         {"sigma", a.sigma},
           {"seed", a.seed},     {"role", a.role},   {"capacity", a.capacity},
           {"x_min", a.x_min},   {"x_max", a.x_max}, {"out", a.out}};
  m.resolved_config = cfg.dump();
  m.input_hashes[a.out] = fnv1a64_file_hex(a.out);
  m.seed = a.seed;
  m.tool_version = kVersion;
  m.duration_seconds = watch.seconds();
  write_manifest(a.out + ".manifest.json", m);
  std::cout << "wrote " << d.num_samples() << " samples to " << a.out << "\n";
  return kExitOk;
}

struct CalibrateArgs {
  std::string case_path, uq_path, cal_path, out_dir;
  std::string theta0 = "1,2";
  double eps0 = 1.0;
  double eta = 1.0, lr_theta = 1e-4, lr_eps = 1e-3;
  double stop_delta = std::numeric_limits<double>::quiet_NaN();
  int max_iters = 100;
  double eps_floor = 0.0;
  double rho = 1e-6, gamma = 0.05, xi_bound = 50.0;
  double load_shed_cost = -1.0;
  std::uint64_t seed = 1;
  bool plot = false;
  std::string dump_program_dir;
};

CalibrationConfig make_config(const CalibrateArgs& a) {
  CalibrationConfig c;
  c.eta = a.eta;
  c.lr_theta = a.lr_theta;
  c.lr_eps = a.lr_eps;
  c.stop_delta = a.stop_delta;
  c.max_iters = a.max_iters;
  c.eps_floor = a.eps_floor;
  c.layer.regularization_rho = a.rho;
  c.seed = a.seed;
  c.uq_options.xi_lower = -a.xi_bound;
  c.uq_options.xi_upper = a.xi_bound;
  c.uq_options.risk_level = a.gamma;
  c.dispatch.load_shed_cost = a.load_shed_cost;
  return c;
}

int run_calibrate(const CalibrateArgs& a, const std::string& cmdline) {
  Stopwatch watch;
  NetworkCase grid = load_case(a.case_path);
  Dataset uq_data = load_dataset_csv(a.uq_path, DatasetRole::uq);
  Dataset cal_data = load_dataset_csv(a.cal_path, DatasetRole::calibration);
  Mat theta0 = parse_theta(a.theta0);
  Vec eps0 = Vec::Constant(grid.n_wind, a.eps0);
  CalibrationConfig config = make_config(a);

  fs::create_directories(a.out_dir);
  if (!a.dump_program_dir.empty() && cal_data.num_samples() > 0) {
    fs::create_directories(a.dump_program_dir);
    EmpiricalErrorModel uq =
        empirical_errors(theta0, uq_data, config.uq_options);
    uq.epsilon = eps0;
    Vec fc(grid.n_wind);
    for (int j = 0; j < grid.n_wind; ++j)
      fc[j] = theta0.col(j).dot(cal_data.features.row(0));
    auto [prog, layout] = build_schedule_program(grid, fc, uq);
    dump_program_to_file(
        prog, (fs::path(a.dump_program_dir) / "schedule_sample1.txt").string());
  }

  CalibrationState state =
      calibrate(grid, uq_data, cal_data, theta0, eps0, config);

  const fs::path dir(a.out_dir);
  write_trajectory_csv((dir / "trajectory.csv").string(), state);
  write_final_json((dir / "final.json").string(), state);
  json cfg = config_to_json(config);
  cfg["case"] = a.case_path;
  cfg["uq_data"] = a.uq_path;
  cfg["cal_data"] = a.cal_path;
  cfg["theta0"] = a.theta0;
  cfg["eps0"] = a.eps0;
  cfg["resolved_stop_delta"] = state.resolved_stop_delta;
  write_text_file((dir / "config.json").string(), cfg.dump(2) + "\n");
  if (a.plot) write_loss_plots(dir, state);

  RunManifest m;
  m.command_line = cmdline;
  m.resolved_config = cfg.dump();
  m.input_hashes[a.case_path] = fnv1a64_file_hex(a.case_path);
  m.input_hashes[a.uq_path] = fnv1a64_file_hex(a.uq_path);
  m.input_hashes[a.cal_path] = fnv1a64_file_hex(a.cal_path);
  m.seed = a.seed;
  m.tool_version = kVersion;
  m.duration_seconds = watch.seconds();
  write_manifest((dir / "manifest.json").string(), m);

  std::cout << "calibration " << (state.converged ? "converged" : "stopped")
            << " after " << state.iter << " iteration(s)\n";
  if (!state.loss_history.empty()) {
    const auto& b = state.loss_history.back();
    std::cout << "final loss: total=" << b.total << " task1=" << b.task1
              << " task2=" << b.task2 << " mse=" << b.mse << "\n";
  }
  return kExitOk;
}

struct SweepArgs {
  std::string case_path, out_dir;
  std::string sigma_c = "15,18,20,22,25";
  std::string eta = "1";
  std::string theta0 = "1,2";
  double eps0 = 1.0;
  double lr_theta = 1e-4, lr_eps = 1e-3;
  double stop_delta = std::numeric_limits<double>::quiet_NaN();
  int max_iters = 60;
  double eps_floor = 0.0;
  double rho = 1e-6, gamma = 0.05, xi_bound = 50.0;
  int n_uq = 20, n_cal = 20;
  double sigma_s = 10.0;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct SweepPoint {
  double sigma_c = 0.0;
  double eta = 0.0;
  int index = 0;
  bool ok = false;
  std::string error;
  CalibrationState state;
};

int run_sweep(const SweepArgs& a, const std::string& cmdline) {
  Stopwatch watch;
  NetworkCase grid = load_case(a.case_path);
  Mat theta0 = parse_theta(a.theta0);
  const auto sigmas = parse_list(a.sigma_c, "--sigma-c");
  const auto etas = parse_list(a.eta, "--eta");
  fs::create_directories(a.out_dir);

  std::vector<SweepPoint> points;
  for (double eta : etas)
    for (double sc : sigmas) {
      SweepPoint p;
      p.sigma_c = sc;
      p.eta = eta;
      p.index = static_cast<int>(points.size());
      points.push_back(p);
    }

  auto run_point = [&](SweepPoint& p) {
    CalibrateArgs ca;
    ca.eta = p.eta;
    ca.lr_theta = a.lr_theta;
    ca.lr_eps = a.lr_eps;
    ca.stop_delta = a.stop_delta;
    ca.max_iters = a.max_iters;
    ca.eps_floor = a.eps_floor;
    ca.rho = a.rho;
    ca.gamma = a.gamma;
    ca.xi_bound = a.xi_bound;
    ca.seed = a.seed;
    CalibrationConfig config = make_config(ca);
    SyntheticOptions gen;
    gen.capacity = grid.wind_capacity;
    try {
      Dataset uq = gen_synthetic_dataset(theta0, a.n_uq, a.sigma_s, a.seed,
                                         DatasetRole::uq, gen);
      Dataset cal = gen_synthetic_dataset(theta0, a.n_cal, p.sigma_c,
                                          a.seed + 1 + p.index,
                                          DatasetRole::calibration, gen);
      char name[96];
      std::snprintf(name, sizeof(name), "point_%02d_sc%g_eta%g", p.index,
                    p.sigma_c, p.eta);
      const fs::path dir = fs::path(a.out_dir) / name;
      fs::create_directories(dir);
      save_dataset_csv(uq, (dir / "uq.csv").string());
      save_dataset_csv(cal, (dir / "cal.csv").string());
      Vec eps0 = Vec::Constant(grid.n_wind, a.eps0);
      p.state = calibrate(grid, uq, cal, theta0, eps0, config);
      write_trajectory_csv((dir / "trajectory.csv").string(), p.state);
      write_final_json((dir / "final.json").string(), p.state);
      p.ok = true;
    } catch (const Error& e) {
      p.error = e.what();
    }
  };

  if (a.jobs <= 1) {
    for (auto& p : points) run_point(p);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < a.jobs; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < points.size();
             i = next.fetch_add(1))
          run_point(points[i]);
      });
    for (auto& th : pool) th.join();
  }

  // summary.csv in grid order
  const fs::path summary_path = fs::path(a.out_dir) / "summary.csv";
  {
    std::ofstream f(summary_path);
    if (!f) throw IoError("cannot write " + summary_path.string());
    f << "sigma_c,eta,status";
    for (int j = 0; j < grid.n_wind; ++j) f << ",eps_star_" << (j + 1);
    for (int j = 0; j < grid.n_wind; ++j)
      for (int r = 0; r < theta0.rows(); ++r)
        f << ",theta_star_" << (r + 1) << "_" << (j + 1);
    f << ",final_mse,final_task1,final_task2,final_total,iters,converged\n";
    char buf[64];
    auto put = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      f << "," << buf;
    };
    for (const auto& p : points) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.sigma_c);
      f << buf;
      put(p.eta);
      f << "," << (p.ok ? "ok" : "failed");
      if (p.ok) {
        for (int j = 0; j < grid.n_wind; ++j) put(p.state.epsilon[j]);
        for (int j = 0; j < grid.n_wind; ++j)
          for (int r = 0; r < theta0.rows(); ++r) put(p.state.theta(r, j));
        const auto& b = p.state.loss_history.back();
        put(b.mse);
        put(b.task1);
        put(b.task2);
        put(b.total);
        f << "," << p.state.iter << "," << (p.state.converged ? 1 : 0);
      } else {
        const int ncols = grid.n_wind + grid.n_wind * theta0.rows() + 4;
        for (int c = 0; c < ncols; ++c) f << ",";
        f << ",0,0";
      }
      f << "\n";
    }
  }

  // trend report: per eta, Spearman of sigma_c vs eps*
  json trends = json::array();
  for (double eta : etas) {
    std::vector<double> xs, eps_star, theta_dev;
    for (const auto& p : points) {
      if (p.eta != eta || !p.ok) continue;
      xs.push_back(p.sigma_c);
      eps_star.push_back(p.state.epsilon.sum());
      theta_dev.push_back((p.state.theta - theta0).norm());
    }
    int inc_eps = 0, nondec_dev = 0;
    for (size_t i = 0; i + 1 < eps_star.size(); ++i) {
      if (eps_star[i + 1] > eps_star[i]) ++inc_eps;
      if (theta_dev[i + 1] >= theta_dev[i]) ++nondec_dev;
    }
    json t;
    t["eta"] = eta;
    t["spearman_sigma_eps"] = xs.size() >= 2 ? spearman(xs, eps_star) : 0.0;
    t["eps_increasing_adjacent_pairs"] = inc_eps;
    t["theta_dev_nondecreasing_adjacent_pairs"] = nondec_dev;
    t["grid_points"] = xs.size();
    trends.push_back(t);
    std::cout << "eta=" << eta
              << ": spearman(sigma_c, eps*)=" << t["spearman_sigma_eps"]
              << ", increasing eps pairs=" << inc_eps << "/"
              << (xs.empty() ? 0 : xs.size() - 1) << "\n";
  }
  write_text_file((fs::path(a.out_dir) / "trends.json").string(),
                  trends.dump(2) + "\n");

  RunManifest m;
  m.command_line = cmdline;
  json cfg{{"case", a.case_path},   {"sigma_c", a.sigma_c},
           {"eta", a.eta},          {"theta0", a.theta0},
           {"eps0", a.eps0},        {"n_uq", a.n_uq},
           {"n_cal", a.n_cal},      {"sigma_s", a.sigma_s},
           {"seed", a.seed},        {"max_iters", a.max_iters},
           {"lr_theta", a.lr_theta}, {"lr_eps", a.lr_eps}};
  m.resolved_config = cfg.dump();
  m.input_hashes[a.case_path] = fnv1a64_file_hex(a.case_path);
  m.seed = a.seed;
  m.tool_version = kVersion;
  m.duration_seconds = watch.seconds();
  write_manifest((fs::path(a.out_dir) / "manifest.json").string(), m);

  const bool any_failed =
      std::any_of(points.begin(), points.end(),
                  [](const SweepPoint& p) { return !p.ok; });
  if (any_failed)
    for (const auto& p : points)
      if (!p.ok)
        std::cerr << "grid point sigma_c=" << p.sigma_c << " eta=" << p.eta
                  << " failed: " << p.error << "\n";
  return kExitOk;
}

struct OperatorArgs {
  std::string case_path, cal_path, listen = "127.0.0.1:7450", out_dir;
  int agents = 1;
  double eps0 = 1.0;
  double eta = 1.0, lr_eps = 1e-3;
  double stop_delta = std::numeric_limits<double>::quiet_NaN();
  int max_iters = 100;
  double eps_floor = 0.0;
  double rho = 1e-6, gamma = 0.05, xi_bound = 50.0;
  int timeout_ms = 30000;
  std::string transcript_path;
};

int run_operator_cmd(const OperatorArgs& a, const std::string& cmdline) {
  Stopwatch watch;
  NetworkCase grid = load_case(a.case_path);
  Dataset cal_data = load_dataset_csv(a.cal_path, DatasetRole::calibration);
  OperatorConfig cfg;
  cfg.calib.eta = a.eta;
  cfg.calib.lr_eps = a.lr_eps;
  cfg.calib.stop_delta = a.stop_delta;
  cfg.calib.max_iters = a.max_iters;
  cfg.calib.eps_floor = a.eps_floor;
  cfg.calib.layer.regularization_rho = a.rho;
  cfg.calib.uq_options.xi_lower = -a.xi_bound;
  cfg.calib.uq_options.xi_upper = a.xi_bound;
  cfg.calib.uq_options.risk_level = a.gamma;
  cfg.eps0 = Vec::Constant(grid.n_wind, a.eps0);
  auto [host, port] = parse_endpoint(a.listen);
  cfg.listen_host = host;
  cfg.listen_port = port;
  cfg.n_agents = a.agents;
  cfg.phase_timeout = std::chrono::milliseconds(a.timeout_ms);

  std::ofstream transcript_file;
  TranscriptSink sink;
  if (!a.transcript_path.empty()) {
    transcript_file.open(a.transcript_path);
    if (!transcript_file)
      throw IoError("cannot write transcript: " + a.transcript_path);
    sink = [&transcript_file](const std::string& dir, const std::string& text) {
      transcript_file << dir << " " << text << "\n";
    };
  }

  CalibrationState state = run_operator(
      grid, cal_data, cfg, sink, [](int p) {
        std::cout << "operator listening on port " << p << std::endl;
      });

  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    write_trajectory_csv((dir / "trajectory.csv").string(), state);
    write_final_json((dir / "final.json").string(), state);
    RunManifest m;
    m.command_line = cmdline;
    json cj = config_to_json(cfg.calib);
    cj["agents"] = a.agents;
    cj["listen"] = a.listen;
    m.resolved_config = cj.dump();
    m.input_hashes[a.case_path] = fnv1a64_file_hex(a.case_path);
    m.input_hashes[a.cal_path] = fnv1a64_file_hex(a.cal_path);
    m.tool_version = kVersion;
    m.duration_seconds = watch.seconds();
    write_manifest((dir / "manifest.json").string(), m);
  }
  std::cout << "distributed calibration "
            << (state.converged ? "converged" : "stopped") << " after "
            << state.iter << " round(s)\n";
  return kExitOk;
}

struct AgentArgs {
  std::string uq_path, connect = "127.0.0.1:7450", out_path;
  std::string theta0 = "1,2";
  int agent_id = 0;
  int farm_column = -1;
  double lr_theta = 1e-4, eta = 1.0;
  int timeout_ms = 30000;
};

int run_agent_cmd(const AgentArgs& a, const std::string&) {
  Dataset uq = load_dataset_csv(a.uq_path, DatasetRole::uq);
  Mat theta0 = parse_theta(a.theta0);
  if (theta0.cols() != 1)
    throw ValidationError("agent --theta0 must be a single column");
  AgentConfig cfg;
  cfg.lr_theta = a.lr_theta;
  cfg.eta = a.eta;
  auto [host, port] = parse_endpoint(a.connect);
  cfg.host = host;
  cfg.port = port;
  cfg.agent_id = a.agent_id;
  cfg.phase_timeout = std::chrono::milliseconds(a.timeout_ms);
  const int col = a.farm_column >= 0 ? a.farm_column : a.agent_id;
  Vec final_theta = run_agent(uq, col, theta0.col(0), cfg);
  json out;
  out["agent_id"] = a.agent_id;
  out["theta"] = std::vector<double>(final_theta.data(),
                                     final_theta.data() + final_theta.size());
  if (!a.out_path.empty()) write_text_file(a.out_path, out.dump(2) + "\n");
  std::cout << out.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drcal: cost-oriented calibration of wind forecasts and "
               "decision conservativeness in a two-stage market"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  const std::string cmdline = join_args(argc, argv);

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--theta0", gd.theta0, "true model, columns ';'-separated");
  gen->add_option("--n", gd.n, "sample count")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", gd.sigma, "noise stddev (MW)")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gd.seed, "RNG seed");
  gen->add_option("--role", gd.role, "uq | calibration");
  gen->add_option("--out", gd.out, "output CSV path")->required();
  gen->add_option("--capacity", gd.capacity, "clip ceiling (MW)");
  gen->add_option("--x-min", gd.x_min, "feature lower bound");
  gen->add_option("--x-max", gd.x_max, "feature upper bound");

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "run the calibration loop");
  cal->add_option("--case", ca.case_path, "case JSON")->required();
  cal->add_option("--uq-data", ca.uq_path, "UQ dataset CSV")->required();
  cal->add_option("--cal-data", ca.cal_path, "calibration dataset CSV")
      ->required();
  cal->add_option("--out", ca.out_dir, "run directory")->required();
  cal->add_option("--theta0", ca.theta0, "initial forecast parameters");
  cal->add_option("--eps0", ca.eps0, "initial ambiguity radius");
  cal->add_option("--eta", ca.eta, "MSE weight");
  cal->add_option("--lr-theta", ca.lr_theta, "theta learning rate");
  cal->add_option("--lr-eps", ca.lr_eps, "epsilon learning rate");
  cal->add_option("--stop-delta", ca.stop_delta,
                  "absolute loss-change stop threshold");
  cal->add_option("--max-iters", ca.max_iters, "iteration cap")
      ->check(CLI::NonNegativeNumber);
  cal->add_option("--eps-floor", ca.eps_floor, "epsilon lower bound");
  cal->add_option("--rho", ca.rho, "layer regularization");
  cal->add_option("--gamma", ca.gamma, "chance-constraint risk level");
  cal->add_option("--xi-bound", ca.xi_bound, "error support half-width (MW)");
  cal->add_option("--load-shed-cost", ca.load_shed_cost,
                  "enable load shedding at this $/MW price");
  cal->add_option("--seed", ca.seed, "seed recorded in the manifest");
  cal->add_flag("--plot", ca.plot, "write SVG plots");
  cal->add_option("--dump-program", ca.dump_program_dir,
                  "dump the first assembled schedule program here");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "grid sweep over sigma_c and eta");
  sweep->add_option("--case", sw.case_path, "case JSON")->required();
  sweep->add_option("--out", sw.out_dir, "sweep directory")->required();
  sweep->add_option("--sigma-c", sw.sigma_c, "calibration noise grid");
  sweep->add_option("--eta", sw.eta, "MSE weight grid");
  sweep->add_option("--theta0", sw.theta0, "true/initial model");
  sweep->add_option("--eps0", sw.eps0, "initial ambiguity radius");
  sweep->add_option("--lr-theta", sw.lr_theta, "theta learning rate");
  sweep->add_option("--lr-eps", sw.lr_eps, "epsilon learning rate");
  sweep->add_option("--stop-delta", sw.stop_delta, "stop threshold");
  sweep->add_option("--max-iters", sw.max_iters, "iteration cap");
  sweep->add_option("--eps-floor", sw.eps_floor, "epsilon lower bound");
  sweep->add_option("--rho", sw.rho, "layer regularization");
  sweep->add_option("--gamma", sw.gamma, "risk level");
  sweep->add_option("--xi-bound", sw.xi_bound, "error support half-width");
  sweep->add_option("--n-uq", sw.n_uq, "UQ sample count");
  sweep->add_option("--n-cal", sw.n_cal, "calibration sample count");
  sweep->add_option("--sigma-s", sw.sigma_s, "UQ noise stddev");
  sweep->add_option("--seed", sw.seed, "base seed");
  sweep->add_option("--jobs", sw.jobs, "parallel grid points")
      ->check(CLI::PositiveNumber);

  OperatorArgs op;
  auto* oper = app.add_subcommand("operator", "distributed-mode operator");
  oper->add_option("--case", op.case_path, "case JSON")->required();
  oper->add_option("--cal-data", op.cal_path, "calibration dataset CSV")
      ->required();
  oper->add_option("--listen", op.listen, "host:port to listen on");
  oper->add_option("--agents", op.agents, "expected agent count")->required();
  oper->add_option("--out", op.out_dir, "run directory");
  oper->add_option("--eps0", op.eps0, "initial ambiguity radius");
  oper->add_option("--eta", op.eta, "MSE weight");
  oper->add_option("--lr-eps", op.lr_eps, "epsilon learning rate");
  oper->add_option("--stop-delta", op.stop_delta, "stop threshold");
  oper->add_option("--max-iters", op.max_iters, "round cap");
  oper->add_option("--eps-floor", op.eps_floor, "epsilon lower bound");
  oper->add_option("--rho", op.rho, "layer regularization");
  oper->add_option("--gamma", op.gamma, "risk level");
  oper->add_option("--xi-bound", op.xi_bound, "error support half-width");
  oper->add_option("--timeout-ms", op.timeout_ms, "per-phase deadline");
  oper->add_option("--transcript", op.transcript_path,
                   "log raw protocol messages here");

  AgentArgs ag;
  auto* agent = app.add_subcommand("agent", "distributed-mode forecast agent");
  agent->add_option("--uq-data", ag.uq_path, "agent's UQ dataset CSV")
      ->required();
  agent->add_option("--theta0", ag.theta0, "agent's initial parameters");
  agent->add_option("--connect", ag.connect, "operator host:port");
  agent->add_option("--agent-id", ag.agent_id, "wind farm index (0-based)");
  agent->add_option("--farm-column", ag.farm_column,
                    "actuals column in the UQ CSV (default: agent id)");
  agent->add_option("--lr-theta", ag.lr_theta, "theta learning rate");
  agent->add_option("--eta", ag.eta, "MSE weight");
  agent->add_option("--timeout-ms", ag.timeout_ms, "receive deadline");
  agent->add_option("--out", ag.out_path, "write final theta JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return run_gen_data(gd, cmdline);
    if (cal->parsed()) return run_calibrate(ca, cmdline);
    if (sweep->parsed()) return run_sweep(sw, cmdline);
    if (oper->parsed()) return run_operator_cmd(op, cmdline);
    if (agent->parsed()) return run_agent_cmd(ag, cmdline);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleSchedule& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InfeasibleDispatch& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const SingularNetwork& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
