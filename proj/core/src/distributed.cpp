#include "drcal/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "drcal/errors.hpp"
#include "drcal/version.hpp"

namespace drcal {

namespace {

// Receives a message, converting peer-reported errors into exceptions and
// enforcing the expected round index.
ProtocolMessage expect_message(MessageChannel& ch,
                               std::chrono::milliseconds timeout,
                               int expected_iter, const char* expected_type) {
  ProtocolMessage msg = ch.receive(timeout);
  if (const auto* err = std::get_if<ProtocolErrorMsg>(&msg.body)) {
    if (err->code == "VERSION_MISMATCH")
      throw VersionMismatch(err->detail);
    throw ProtocolError(err->code, err->detail);
  }
  if (std::string(message_type_name(msg.body)) != expected_type) {
    ch.send(expected_iter,
            ProtocolErrorMsg{"BAD_TYPE",
                             std::string("expected ") + expected_type +
                                 ", got " + message_type_name(msg.body)});
    throw ProtocolError("BAD_TYPE", std::string("expected ") + expected_type +
                                        ", got " + message_type_name(msg.body));
  }
  if (msg.iter != expected_iter) {
    ch.send(expected_iter,
            ProtocolErrorMsg{"BAD_ITER",
                             "expected round " + std::to_string(expected_iter) +
                                 ", got " + std::to_string(msg.iter)});
    throw ProtocolError("BAD_ITER",
                        "expected round " + std::to_string(expected_iter) +
                            ", got " + std::to_string(msg.iter));
  }
  return msg;
}

void broadcast_shutdown(std::vector<MessageChannel>& agents, int iter,
                        const std::string& reason) {
  for (auto& ch : agents) {
    if (!ch.is_open()) continue;
    try {
      ch.send(iter, ShutdownMsg{reason});
    } catch (const Error&) {
      // best effort; the run is ending anyway
    }
  }
}

}  // namespace

CalibrationState run_operator(const NetworkCase& grid, const Dataset& cal_data,
                              const OperatorConfig& config,
                              TranscriptSink transcript,
                              std::function<void(int)> on_listening) {
  config.calib.validate();
  const int nw = grid.n_wind;
  if (config.n_agents != nw)
    throw ValidationError("expected one agent per wind farm (" +
                          std::to_string(nw) + "), configured " +
                          std::to_string(config.n_agents));
  if (config.eps0.size() != nw)
    throw DimensionMismatch("eps0 length does not match wind farms");
  const int n_samples = cal_data.num_samples();
  const int n_features = cal_data.num_features();

  int listen_fd = tcp_listen(config.listen_host, config.listen_port, nw);
  if (on_listening) on_listening(tcp_local_port(listen_fd));

  // channels indexed by agent id after the hello phase
  std::vector<MessageChannel> agents;
  agents.reserve(nw);
  std::vector<int> id_of_channel;
  try {
    for (int k = 0; k < nw; ++k) {
      int fd = tcp_accept(listen_fd, config.phase_timeout);
      agents.emplace_back(fd);
      if (transcript) agents.back().set_transcript(transcript);
    }
  } catch (...) {
    tcp_close(listen_fd);
    throw;
  }
  tcp_close(listen_fd);

  std::vector<int> channel_of_agent(nw, -1);
  for (int k = 0; k < nw; ++k) {
    ProtocolMessage msg =
        expect_message(agents[k], config.phase_timeout, 0, "hello");
    const auto& hello = std::get<HelloMsg>(msg.body);
    if (hello.protocol_version != kProtocolVersion) {
      agents[k].send(0, ProtocolErrorMsg{
                            "VERSION_MISMATCH",
                            "operator speaks protocol version " +
                                std::to_string(kProtocolVersion)});
      throw VersionMismatch("agent " + std::to_string(hello.agent_id) +
                            " speaks protocol version " +
                            std::to_string(hello.protocol_version));
    }
    if (hello.agent_id < 0 || hello.agent_id >= nw ||
        channel_of_agent[hello.agent_id] != -1) {
      agents[k].send(0, ProtocolErrorMsg{"BAD_AGENT",
                                         "invalid or duplicate agent id " +
                                             std::to_string(hello.agent_id)});
      throw ProtocolError("BAD_AGENT", "invalid or duplicate agent id " +
                                           std::to_string(hello.agent_id));
    }
    if (hello.n_features != n_features) {
      agents[k].send(0, ProtocolErrorMsg{
                            "BAD_LENGTH",
                            "agent features " + std::to_string(hello.n_features) +
                                " != calibration features " +
                                std::to_string(n_features)});
      throw ProtocolError("BAD_LENGTH", "agent feature dimension mismatch");
    }
    channel_of_agent[hello.agent_id] = k;
  }

  // UQ submission: raw errors per farm, clamped into the configured support
  const ErrorModelOptions& um = config.calib.uq_options;
  EmpiricalErrorModel uq;
  uq.risk_level = um.risk_level;
  uq.xi_lower = Vec::Constant(nw, um.xi_lower);
  uq.xi_upper = Vec::Constant(nw, um.xi_upper);
  int n_uq = -1;
  Mat errors;
  for (int j = 0; j < nw; ++j) {
    MessageChannel& ch = agents[channel_of_agent[j]];
    ProtocolMessage msg =
        expect_message(ch, config.phase_timeout, 0, "uq_submit");
    const auto& sub = std::get<UqSubmitMsg>(msg.body);
    if (sub.agent_id != j)
      throw ProtocolError("BAD_AGENT", "uq_submit from unexpected agent");
    if (n_uq < 0) {
      n_uq = static_cast<int>(sub.errors.size());
      if (n_uq == 0)
        throw ProtocolError("BAD_LENGTH", "empty error submission");
      errors = Mat(nw, n_uq);
    } else if (static_cast<int>(sub.errors.size()) != n_uq) {
      ch.send(0, ProtocolErrorMsg{"BAD_LENGTH",
                                  "error sample counts differ across agents"});
      throw ProtocolError("BAD_LENGTH",
                          "error sample counts differ across agents");
    }
    for (int i = 0; i < n_uq; ++i)
      errors(j, i) = std::clamp(sub.errors[i], um.xi_lower, um.xi_upper);
  }
  uq.errors = errors;

  CalibrationState state;
  state.theta = Mat(0, 0);  // parameters remain private to the agents
  state.epsilon = config.eps0;
  state.resolved_stop_delta = config.calib.stop_delta;

  const std::vector<std::vector<double>> samples = [&] {
    std::vector<std::vector<double>> s(n_samples);
    for (int i = 0; i < n_samples; ++i) {
      s[i].resize(n_features);
      for (int f = 0; f < n_features; ++f) s[i][f] = cal_data.features(i, f);
    }
    return s;
  }();

  double prev_total = std::numeric_limits<double>::quiet_NaN();
  double resolved_delta = config.calib.stop_delta;
  try {
    for (int t = 0; t < config.calib.max_iters; ++t) {
      uq.epsilon = state.epsilon;

      // forward pass: distribute the calibration set, gather forecasts
      for (int j = 0; j < nw; ++j) {
        RoundStartMsg rs;
        rs.samples = samples;
        rs.actuals.resize(n_samples);
        for (int i = 0; i < n_samples; ++i)
          rs.actuals[i] = cal_data.actuals(i, j);
        agents[channel_of_agent[j]].send(t, std::move(rs));
      }
      Mat forecasts(n_samples, nw);
      for (int j = 0; j < nw; ++j) {
        MessageChannel& ch = agents[channel_of_agent[j]];
        ProtocolMessage msg =
            expect_message(ch, config.phase_timeout, t, "forecast_reply");
        const auto& fr = std::get<ForecastReplyMsg>(msg.body);
        if (fr.agent_id != j)
          throw ProtocolError("BAD_AGENT", "forecast_reply from unexpected agent");
        if (static_cast<int>(fr.forecasts.size()) != n_samples) {
          ch.send(t, ProtocolErrorMsg{"BAD_LENGTH",
                                      "forecast_reply length " +
                                          std::to_string(fr.forecasts.size()) +
                                          " != " + std::to_string(n_samples)});
          throw ProtocolError("BAD_LENGTH", "forecast_reply length mismatch");
        }
        for (int i = 0; i < n_samples; ++i) forecasts(i, j) = fr.forecasts[i];
      }

      // clear both stages per sample
      Mat dldy(n_samples, nw);
      Vec dlde_sum = Vec::Zero(nw);
      double t1 = 0.0, t2 = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        SampleEvaluation ev = evaluate_sample(
            grid, uq, forecasts.row(i).transpose(),
            cal_data.actuals.row(i).transpose(), config.calib.layer,
            config.calib.dispatch);
        dldy.row(i) = ev.d_loss_d_yhat.transpose();
        dlde_sum += ev.d_loss_d_eps;
        t1 += ev.task1;
        t2 += ev.task2;
      }
      LossBreakdown b;
      b.task1 = t1 / n_samples;
      b.task2 = t2 / n_samples;
      b.mse = mse_from_forecasts(cal_data.actuals, forecasts);
      b.total = b.task1 + b.task2 + config.calib.eta * b.mse;

      if (std::isnan(resolved_delta))
        resolved_delta = std::max(1e-5 * std::abs(b.total), 1e-12);

      if (t >= 1 && std::abs(b.total - prev_total) < resolved_delta) {
        // converged: commit this round without a parameter update
        state.loss_history.push_back(b);
        state.epsilon_trajectory.push_back(state.epsilon);
        state.iter = t + 1;
        state.converged = true;
        state.resolved_stop_delta = resolved_delta;
        for (auto& ch : agents)
          ch.send(t, RoundResultMsg{b.mse, b.task1, b.task2, b.total});
        broadcast_shutdown(agents, t, "converged");
        return state;
      }

      Vec d_eps = dlde_sum / n_samples;
      if (!d_eps.allFinite() || !dldy.allFinite())
        throw NonFiniteGradient("non-finite gradient at round " +
                                std::to_string(t + 1));

      // backward pass: hand each agent its share of the gradient
      for (int j = 0; j < nw; ++j) {
        GradSignalMsg gs;
        gs.agent_id = j;
        gs.d_loss_d_yhat.resize(n_samples);
        for (int i = 0; i < n_samples; ++i) gs.d_loss_d_yhat[i] = dldy(i, j);
        agents[channel_of_agent[j]].send(t, std::move(gs));
      }
      for (int j = 0; j < nw; ++j) {
        MessageChannel& ch = agents[channel_of_agent[j]];
        ProtocolMessage msg =
            expect_message(ch, config.phase_timeout, t, "update_ack");
        const auto& ack = std::get<UpdateAckMsg>(msg.body);
        if (ack.agent_id != j)
          throw ProtocolError("BAD_AGENT", "update_ack from unexpected agent");
      }

      // commit the round atomically: losses, epsilon, round result
      state.loss_history.push_back(b);
      state.epsilon_trajectory.push_back(state.epsilon);
      state.iter = t + 1;
      state.resolved_stop_delta = resolved_delta;
      prev_total = b.total;
      state.epsilon = epsilon_update(state.epsilon, d_eps, config.calib.lr_eps,
                                     config.calib.eps_floor);
      for (auto& ch : agents)
        ch.send(t, RoundResultMsg{b.mse, b.task1, b.task2, b.total});
    }
    broadcast_shutdown(agents, state.iter, "max_iters");
  } catch (const Error&) {
    broadcast_shutdown(agents, state.iter, "aborted");
    throw;
  }
  return state;
}

Vec run_agent(const Dataset& uq_data, int farm_column, const Vec& theta0_j,
              const AgentConfig& config, TranscriptSink transcript) {
  if (farm_column < 0 || farm_column >= uq_data.num_wind())
    throw ValidationError("farm_column out of range for the UQ dataset");
  if (theta0_j.size() != uq_data.num_features())
    throw DimensionMismatch("theta0 length does not match UQ features");

  MessageChannel ch(tcp_connect(config.host, config.port, config.phase_timeout));
  if (transcript) ch.set_transcript(transcript);

  AgentState st;
  st.theta_j = theta0_j;
  st.lr_theta = config.lr_theta;
  st.eta = config.eta;

  ch.send(0, HelloMsg{config.agent_id,
                      static_cast<int>(uq_data.num_features()),
                      kProtocolVersion});
  {
    Vec errs = raw_forecast_errors(st.theta_j, uq_data.features,
                                   uq_data.actuals.col(farm_column));
    UqSubmitMsg sub;
    sub.agent_id = config.agent_id;
    sub.errors.assign(errs.data(), errs.data() + errs.size());
    ch.send(0, std::move(sub));
  }

  Mat round_features;  // most recent calibration set
  Vec round_actuals;
  while (true) {
    ProtocolMessage msg = ch.receive(config.phase_timeout);
    if (const auto* err = std::get_if<ProtocolErrorMsg>(&msg.body)) {
      if (err->code == "VERSION_MISMATCH") throw VersionMismatch(err->detail);
      throw ProtocolError(err->code, err->detail);
    }
    if (const auto* rs = std::get_if<RoundStartMsg>(&msg.body)) {
      const int n = static_cast<int>(rs->samples.size());
      if (static_cast<int>(rs->actuals.size()) != n) {
        ch.send(msg.iter, ProtocolErrorMsg{"BAD_LENGTH",
                                           "samples/actuals length mismatch"});
        throw ProtocolError("BAD_LENGTH", "samples/actuals length mismatch");
      }
      round_features = Mat(n, st.theta_j.size());
      round_actuals = Vec(n);
      for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rs->samples[i].size()) != st.theta_j.size()) {
          ch.send(msg.iter,
                  ProtocolErrorMsg{"BAD_LENGTH", "feature vector size mismatch"});
          throw ProtocolError("BAD_LENGTH", "feature vector size mismatch");
        }
        for (int f = 0; f < st.theta_j.size(); ++f)
          round_features(i, f) = rs->samples[i][f];
        round_actuals[i] = rs->actuals[i];
      }
      Vec fc = forecast_series(st.theta_j, round_features);
      ForecastReplyMsg reply;
      reply.agent_id = config.agent_id;
      reply.forecasts.assign(fc.data(), fc.data() + fc.size());
      st.last_iter = msg.iter;
      ch.send(msg.iter, std::move(reply));
    } else if (const auto* gs = std::get_if<GradSignalMsg>(&msg.body)) {
      if (static_cast<int>(gs->d_loss_d_yhat.size()) != round_features.rows()) {
        ch.send(msg.iter, ProtocolErrorMsg{
                              "BAD_LENGTH",
                              "grad_signal length " +
                                  std::to_string(gs->d_loss_d_yhat.size()) +
                                  " != " + std::to_string(round_features.rows())});
        throw ProtocolError("BAD_LENGTH", "grad_signal length mismatch");
      }
      Vec dldy = Eigen::Map<const Vec>(gs->d_loss_d_yhat.data(),
                                       gs->d_loss_d_yhat.size());
      Vec grad = theta_column_gradient(round_features, round_actuals,
                                       st.theta_j, dldy, st.eta);
      st.theta_j -= st.lr_theta * grad;
      ch.send(msg.iter, UpdateAckMsg{config.agent_id, true});
    } else if (std::holds_alternative<RoundResultMsg>(msg.body)) {
      // informational
    } else if (std::holds_alternative<ShutdownMsg>(msg.body)) {
      return st.theta_j;
    } else {
      ch.send(msg.iter, ProtocolErrorMsg{"BAD_TYPE",
                                         std::string("unexpected ") +
                                             message_type_name(msg.body)});
      throw ProtocolError("BAD_TYPE", std::string("unexpected message ") +
                                          message_type_name(msg.body));
    }
  }
}

}  // namespace drcal
