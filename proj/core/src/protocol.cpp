#include "drcal/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <utility>

#include <nlohmann/json.hpp>

#include "drcal/errors.hpp"

namespace drcal {

using json = nlohmann::json;

namespace {

struct TypeName {
  const char* name;
};

const char* kTypeNames[] = {"hello",       "uq_submit",    "round_start",
                            "forecast_reply", "grad_signal", "update_ack",
                            "round_result", "shutdown",     "protocol_error"};

json encode_body(const MessageBody& body) {
  json p = json::object();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HelloMsg>) {
          p["agent_id"] = m.agent_id;
          p["n_features"] = m.n_features;
          p["protocol_version"] = m.protocol_version;
        } else if constexpr (std::is_same_v<T, UqSubmitMsg>) {
          p["agent_id"] = m.agent_id;
          p["errors"] = m.errors;
        } else if constexpr (std::is_same_v<T, RoundStartMsg>) {
          p["samples"] = m.samples;
          p["actuals"] = m.actuals;
        } else if constexpr (std::is_same_v<T, ForecastReplyMsg>) {
          p["agent_id"] = m.agent_id;
          p["forecasts"] = m.forecasts;
        } else if constexpr (std::is_same_v<T, GradSignalMsg>) {
          p["agent_id"] = m.agent_id;
          p["d_loss_d_yhat"] = m.d_loss_d_yhat;
        } else if constexpr (std::is_same_v<T, UpdateAckMsg>) {
          p["agent_id"] = m.agent_id;
          p["local_mse_grad_applied"] = m.local_mse_grad_applied;
        } else if constexpr (std::is_same_v<T, RoundResultMsg>) {
          p["breakdown"] = {{"mse", m.mse},
                            {"task1", m.task1},
                            {"task2", m.task2},
                            {"total", m.total}};
        } else if constexpr (std::is_same_v<T, ShutdownMsg>) {
          p["reason"] = m.reason;
        } else if constexpr (std::is_same_v<T, ProtocolErrorMsg>) {
          p["code"] = m.code;
          p["detail"] = m.detail;
        }
      },
      body);
  return p;
}

template <typename T>
T get_field(const json& p, const char* key) {
  if (!p.contains(key))
    throw ProtocolError("BAD_PAYLOAD", std::string("missing field ") + key);
  try {
    return p[key].get<T>();
  } catch (const json::exception&) {
    throw ProtocolError("BAD_PAYLOAD", std::string("bad field ") + key);
  }
}

MessageBody decode_body(const std::string& type, const json& p) {
  if (type == "hello") {
    HelloMsg m;
    m.agent_id = get_field<int>(p, "agent_id");
    m.n_features = get_field<int>(p, "n_features");
    m.protocol_version = get_field<int>(p, "protocol_version");
    return m;
  }
  if (type == "uq_submit") {
    UqSubmitMsg m;
    m.agent_id = get_field<int>(p, "agent_id");
    m.errors = get_field<std::vector<double>>(p, "errors");
    return m;
  }
  if (type == "round_start") {
    RoundStartMsg m;
    m.samples = get_field<std::vector<std::vector<double>>>(p, "samples");
    m.actuals = get_field<std::vector<double>>(p, "actuals");
    return m;
  }
  if (type == "forecast_reply") {
    ForecastReplyMsg m;
    m.agent_id = get_field<int>(p, "agent_id");
    m.forecasts = get_field<std::vector<double>>(p, "forecasts");
    return m;
  }
  if (type == "grad_signal") {
    GradSignalMsg m;
    m.agent_id = get_field<int>(p, "agent_id");
    m.d_loss_d_yhat = get_field<std::vector<double>>(p, "d_loss_d_yhat");
    return m;
  }
  if (type == "update_ack") {
    UpdateAckMsg m;
    m.agent_id = get_field<int>(p, "agent_id");
    m.local_mse_grad_applied = get_field<bool>(p, "local_mse_grad_applied");
    return m;
  }
  if (type == "round_result") {
    RoundResultMsg m;
    if (!p.contains("breakdown"))
      throw ProtocolError("BAD_PAYLOAD", "missing field breakdown");
    const json& b = p["breakdown"];
    m.mse = get_field<double>(b, "mse");
    m.task1 = get_field<double>(b, "task1");
    m.task2 = get_field<double>(b, "task2");
    m.total = get_field<double>(b, "total");
    return m;
  }
  if (type == "shutdown") {
    ShutdownMsg m;
    m.reason = get_field<std::string>(p, "reason");
    return m;
  }
  if (type == "protocol_error") {
    ProtocolErrorMsg m;
    m.code = get_field<std::string>(p, "code");
    m.detail = get_field<std::string>(p, "detail");
    return m;
  }
  throw ProtocolError("BAD_TYPE", "unknown message type: " + type);
}

}  // namespace

const char* message_type_name(const MessageBody& body) {
  return kTypeNames[body.index()];
}

std::string encode_message(const ProtocolMessage& msg) {
  json doc;
  doc["type"] = message_type_name(msg.body);
  doc["seq"] = msg.seq;
  doc["iter"] = msg.iter;
  doc["payload"] = encode_body(msg.body);
  return doc.dump();
}

ProtocolMessage decode_message(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ProtocolError("BAD_JSON", e.what());
  }
  if (!doc.contains("type") || !doc["type"].is_string())
    throw ProtocolError("BAD_TYPE", "missing type field");
  ProtocolMessage msg;
  msg.seq = get_field<std::uint64_t>(doc, "seq");
  msg.iter = get_field<int>(doc, "iter");
  if (!doc.contains("payload") || !doc["payload"].is_object())
    throw ProtocolError("BAD_PAYLOAD", "missing payload object");
  msg.body = decode_body(doc["type"].get<std::string>(), doc["payload"]);
  return msg;
}

// ---- channel ---------------------------------------------------------------

MessageChannel::MessageChannel(int fd) : fd_(fd) {}

MessageChannel::~MessageChannel() { close(); }

MessageChannel::MessageChannel(MessageChannel&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      next_send_seq_(other.next_send_seq_),
      last_recv_seq_(other.last_recv_seq_),
      received_any_(other.received_any_),
      transcript_(std::move(other.transcript_)) {}

MessageChannel& MessageChannel::operator=(MessageChannel&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    next_send_seq_ = other.next_send_seq_;
    last_recv_seq_ = other.last_recv_seq_;
    received_any_ = other.received_any_;
    transcript_ = std::move(other.transcript_);
  }
  return *this;
}

void MessageChannel::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void MessageChannel::send(int iter, MessageBody body) {
  if (fd_ < 0) throw ConnectionLost("send on closed channel");
  ProtocolMessage msg;
  msg.seq = next_send_seq_++;
  msg.iter = iter;
  msg.body = std::move(body);
  const std::string text = encode_message(msg);
  if (transcript_) transcript_("send", text);
  unsigned char header[4];
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  header[0] = (len >> 24) & 0xff;
  header[1] = (len >> 16) & 0xff;
  header[2] = (len >> 8) & 0xff;
  header[3] = len & 0xff;
  std::string framed(reinterpret_cast<char*>(header), 4);
  framed += text;
  size_t off = 0;
  while (off < framed.size()) {
    ssize_t n = ::send(fd_, framed.data() + off, framed.size() - off,
                       MSG_NOSIGNAL);
    if (n <= 0) {
      close();
      throw ConnectionLost("peer closed connection during send");
    }
    off += static_cast<size_t>(n);
  }
}

namespace {

void read_exact(int fd, void* buf, size_t len,
                std::chrono::steady_clock::time_point deadline) {
  auto* p = static_cast<unsigned char*>(buf);
  size_t got = 0;
  while (got < len) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) throw AgentTimeout("receive timed out");
    const int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
            .count());
    pollfd pfd{fd, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, std::max(1, wait_ms));
    if (pr == 0) throw AgentTimeout("receive timed out");
    if (pr < 0) throw ConnectionLost("poll failed");
    ssize_t n = ::recv(fd, p + got, len - got, 0);
    if (n == 0) throw ConnectionLost("peer closed connection");
    if (n < 0) throw ConnectionLost("recv failed");
    got += static_cast<size_t>(n);
  }
}

}  // namespace

ProtocolMessage MessageChannel::receive(std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw ConnectionLost("receive on closed channel");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  unsigned char header[4];
  read_exact(fd_, header, 4, deadline);
  const std::uint32_t len = (std::uint32_t(header[0]) << 24) |
                            (std::uint32_t(header[1]) << 16) |
                            (std::uint32_t(header[2]) << 8) |
                            std::uint32_t(header[3]);
  if (len == 0 || len > (64u << 20))
    throw ProtocolError("BAD_FRAME", "frame length " + std::to_string(len));
  std::string text(len, '\0');
  read_exact(fd_, text.data(), len, deadline);
  if (transcript_) transcript_("recv", text);
  ProtocolMessage msg = decode_message(text);
  if (received_any_ && msg.seq <= last_recv_seq_)
    throw ProtocolError("BAD_SEQ",
                        "sequence number " + std::to_string(msg.seq) +
                            " not greater than " +
                            std::to_string(last_recv_seq_));
  last_recv_seq_ = msg.seq;
  received_any_ = true;
  return msg;
}

// ---- TCP plumbing ----------------------------------------------------------

int tcp_listen(const std::string& host, int port, int backlog) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ConnectionLost("socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw ValidationError("invalid listen address: " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw ConnectionLost("bind failed on " + host + ":" + std::to_string(port));
  }
  if (::listen(fd, backlog) != 0) {
    ::close(fd);
    throw ConnectionLost("listen failed");
  }
  return fd;
}

int tcp_accept(int listen_fd, std::chrono::milliseconds timeout) {
  pollfd pfd{listen_fd, POLLIN, 0};
  const int pr = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (pr == 0) throw AgentTimeout("timed out waiting for agent connection");
  if (pr < 0) throw ConnectionLost("poll failed while accepting");
  int fd = ::accept(listen_fd, nullptr, nullptr);
  if (fd < 0) throw ConnectionLost("accept failed");
  return fd;
}

int tcp_connect(const std::string& host, int port,
                std::chrono::milliseconds timeout) {
  (void)timeout;
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ConnectionLost("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  std::string ip = host;
  if (::inet_pton(AF_INET, ip.c_str(), &addr.sin_addr) != 1) {
    hostent* he = ::gethostbyname(host.c_str());
    if (!he || he->h_addrtype != AF_INET) {
      ::close(fd);
      throw ConnectionLost("cannot resolve host: " + host);
    }
    std::memcpy(&addr.sin_addr, he->h_addr_list[0], sizeof(in_addr));
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw ConnectionLost("cannot connect to " + host + ":" +
                         std::to_string(port));
  }
  return fd;
}

int tcp_local_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
    throw ConnectionLost("getsockname failed");
  return ntohs(addr.sin_port);
}

void tcp_close(int fd) {
  if (fd >= 0) ::close(fd);
}

std::pair<std::string, int> parse_endpoint(const std::string& endpoint) {
  const auto pos = endpoint.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= endpoint.size())
    throw ValidationError("endpoint must be host:port, got '" + endpoint + "'");
  const std::string host = endpoint.substr(0, pos);
  int port = 0;
  try {
    port = std::stoi(endpoint.substr(pos + 1));
  } catch (const std::exception&) {
    throw ValidationError("invalid port in endpoint '" + endpoint + "'");
  }
  if (port < 0 || port > 65535)
    throw ValidationError("port out of range in endpoint '" + endpoint + "'");
  return {host, port};
}

}  // namespace drcal
