#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "drcal/calibrate.hpp"
#include "drcal/protocol.hpp"

namespace drcal {

struct OperatorConfig {
  CalibrationConfig calib;  // eta, lr_eps, stop rule, layer, uq options
  Vec eps0;                 // per farm
  std::string listen_host = "127.0.0.1";
  int listen_port = 0;      // 0 picks an ephemeral port
  int n_agents = 0;         // must equal the case's wind farm count
  std::chrono::milliseconds phase_timeout{30000};
};

/// Runs the operator side of the distributed calibration: accepts one agent
/// per wind farm, collects their empirical errors, then per round broadcasts
/// the calibration samples, clears both market stages per sample, returns
/// d loss / d yhat to each agent and updates epsilon locally. The returned
/// state carries losses and epsilon; theta stays with the agents (the theta
/// field is left empty). on_listening, when set, receives the bound port
/// before any accept.
CalibrationState run_operator(const NetworkCase& grid, const Dataset& cal_data,
                              const OperatorConfig& config,
                              TranscriptSink transcript = {},
                              std::function<void(int)> on_listening = {});

struct AgentConfig {
  double lr_theta = 1e-4;
  double eta = 1.0;
  std::string host = "127.0.0.1";
  int port = 0;
  int agent_id = 0;  // the wind farm index this agent forecasts for
  std::chrono::milliseconds phase_timeout{30000};
};

/// Locally-held per-agent calibration state. theta_j is private: it is never
/// serialized into any protocol message.
struct AgentState {
  Vec theta_j;
  double lr_theta = 0.0;
  double eta = 0.0;
  int last_iter = -1;
};

/// Runs a forecasting agent: submits its empirical errors once, then per
/// round returns forecasts theta_j' x_i and applies the received gradient
/// signal to theta_j. farm_column selects this agent's actuals column in
/// uq_data. Returns the final theta_j.
Vec run_agent(const Dataset& uq_data, int farm_column, const Vec& theta0_j,
              const AgentConfig& config, TranscriptSink transcript = {});

}  // namespace drcal
