#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace drcal {

// Tagged message bodies of the operator/agent calibration protocol. Agent
// model parameters are never part of any message type; only forecasts,
// errors, and gradients cross the wire.

struct HelloMsg {
  int agent_id = 0;
  int n_features = 0;
  int protocol_version = 0;
};

struct UqSubmitMsg {
  int agent_id = 0;
  std::vector<double> errors;  // MW, one per UQ sample
};

struct RoundStartMsg {
  std::vector<std::vector<double>> samples;  // calibration features per sample
  std::vector<double> actuals;               // realized MW for this agent's farm
};

struct ForecastReplyMsg {
  int agent_id = 0;
  std::vector<double> forecasts;  // MW per calibration sample
};

struct GradSignalMsg {
  int agent_id = 0;
  std::vector<double> d_loss_d_yhat;  // per calibration sample
};

struct UpdateAckMsg {
  int agent_id = 0;
  bool local_mse_grad_applied = false;
};

struct RoundResultMsg {
  double mse = 0.0;
  double task1 = 0.0;
  double task2 = 0.0;
  double total = 0.0;
};

struct ShutdownMsg {
  std::string reason;
};

struct ProtocolErrorMsg {
  std::string code;
  std::string detail;
};

using MessageBody =
    std::variant<HelloMsg, UqSubmitMsg, RoundStartMsg, ForecastReplyMsg,
                 GradSignalMsg, UpdateAckMsg, RoundResultMsg, ShutdownMsg,
                 ProtocolErrorMsg>;

/// Wire envelope. seq numbers increase monotonically per connection
/// direction; iter must match the operator's current round (0 before the
/// first round).
struct ProtocolMessage {
  std::uint64_t seq = 0;
  int iter = 0;
  MessageBody body;
};

const char* message_type_name(const MessageBody& body);

/// JSON text of the envelope {type, seq, iter, payload}; doubles round-trip
/// exactly. decode throws ProtocolError on malformed input.
std::string encode_message(const ProtocolMessage& msg);
ProtocolMessage decode_message(const std::string& text);

/// Observer for raw message text; direction is "send" or "recv".
using TranscriptSink =
    std::function<void(const std::string& direction, const std::string& text)>;

/// Length-prefixed JSON framing (4-byte big-endian length) over a stream
/// socket. Owns the fd. Throws ConnectionLost / AgentTimeout / ProtocolError.
class MessageChannel {
 public:
  explicit MessageChannel(int fd);
  ~MessageChannel();
  MessageChannel(MessageChannel&& other) noexcept;
  MessageChannel& operator=(MessageChannel&& other) noexcept;
  MessageChannel(const MessageChannel&) = delete;
  MessageChannel& operator=(const MessageChannel&) = delete;

  /// Stamps the next send sequence number, frames and writes the message.
  void send(int iter, MessageBody body);

  /// Blocks up to the timeout; validates sequence monotonicity.
  ProtocolMessage receive(std::chrono::milliseconds timeout);

  void set_transcript(TranscriptSink sink) { transcript_ = std::move(sink); }
  void close();
  bool is_open() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
  std::uint64_t next_send_seq_ = 0;
  std::uint64_t last_recv_seq_ = 0;
  bool received_any_ = false;
  TranscriptSink transcript_;
};

// TCP plumbing shared by operator and agent.
int tcp_listen(const std::string& host, int port, int backlog);
int tcp_accept(int listen_fd, std::chrono::milliseconds timeout);
int tcp_connect(const std::string& host, int port,
                std::chrono::milliseconds timeout);
int tcp_local_port(int fd);
void tcp_close(int fd);

/// Parses "host:port". Throws ValidationError.
std::pair<std::string, int> parse_endpoint(const std::string& endpoint);

}  // namespace drcal
