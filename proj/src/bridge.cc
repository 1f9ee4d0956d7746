// Copyright 2026 The simulst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "simulst/bridge.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sodium.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "simulst/tokenizer.h"

namespace simulst {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxLineBytes = 64u << 20;

std::string errno_message(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

json error_reply(std::string_view kind, std::string_view message) {
  return json{{"ok", false}, {"kind", kind}, {"error", message}};
}

class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace

std::string encode_frames(std::span<const float> frames) {
  std::vector<unsigned char> bytes(frames.size() * 4);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(frames[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  const std::size_t len = sodium_base64_ENCODED_LEN(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  std::string out(len, '\0');
  sodium_bin2base64(out.data(), len, bytes.data(), bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  out.resize(len - 1);  // drop the terminator
  return out;
}

std::vector<float> decode_frames(std::string_view base64) {
  std::vector<unsigned char> bytes(base64.size() / 4 * 3 + 3);
  std::size_t len = 0;
  if (sodium_base642bin(bytes.data(), bytes.size(), base64.data(), base64.size(), nullptr, &len,
                        nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw FormatError("frames: invalid base64 payload");
  }
  if (len % 4 != 0) throw FormatError("frames: payload is not a whole number of floats");
  std::vector<float> out(len / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

std::string vocab_hash_hex(const Vocabulary& vocab) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << vocab.hash();
  return out.str();
}

// --- LineChannel -----------------------------------------------------------

LineChannel::LineChannel(int fd) : fd_(fd) {}

LineChannel::~LineChannel() { close(); }

LineChannel::LineChannel(LineChannel&& other) noexcept
    : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
  other.fd_ = -1;
}

LineChannel& LineChannel::operator=(LineChannel&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    buffer_ = std::move(other.buffer_);
    other.fd_ = -1;
  }
  return *this;
}

void LineChannel::send_line(std::string_view line) {
  if (fd_ < 0) throw TransportError("send on a closed channel");
  std::string data(line);
  data += '\n';
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_message("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> LineChannel::recv_line(std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw TransportError("receive on a closed channel");
  for (;;) {
    const auto newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return line;
    }
    if (buffer_.size() > kMaxLineBytes) throw TransportError("message exceeds size limit");

    pollfd pfd{fd_, POLLIN, 0};
    const int wait_ms = timeout.count() > 0 ? static_cast<int>(timeout.count()) : -1;
    const int ready = ::poll(&pfd, 1, wait_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_message("poll"));
    }
    if (ready == 0) throw TransportError("timed out waiting for the peer");

    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_message("recv"));
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      throw TransportError("connection closed in the middle of a message");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void LineChannel::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void LineChannel::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

// --- Endpoint / sockets ----------------------------------------------------

Endpoint Endpoint::parse(std::string_view text) {
  if (text.starts_with("tcp://")) text.remove_prefix(6);
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    throw ArgumentError("endpoint '" + std::string(text) + "' is not host:port");
  }
  Endpoint ep;
  if (colon > 0) ep.host = std::string(text.substr(0, colon));
  const std::string port_text(text.substr(colon + 1));
  std::size_t used = 0;
  unsigned long port = 0;
  try {
    port = std::stoul(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port_text.size() || port > 65535) {
    throw ArgumentError("endpoint port '" + port_text + "' is invalid");
  }
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

namespace {

addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) {
    throw TransportError("cannot resolve " + ep.to_string() + ": " + ::gai_strerror(rc));
  }
  return res;
}

}  // namespace

LineChannel connect_tcp(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  addrinfo* res = resolve(endpoint, false);
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) throw TransportError(errno_message("socket"));
  if (timeout.count() > 0) {
    timeval tv{};
    tv.tv_sec = static_cast<long>(timeout.count() / 1000);
    tv.tv_usec = static_cast<long>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  }
  if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    const std::string msg = errno_message(("connect " + endpoint.to_string()).c_str());
    ::close(fd);
    throw TransportError(msg);
  }
  set_nodelay(fd);
  return LineChannel(fd);
}

TcpListener::TcpListener(const Endpoint& endpoint) {
  addrinfo* res = resolve(endpoint, true);
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) throw TransportError(errno_message("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 64) != 0) {
    const std::string msg = errno_message(("listen on " + endpoint.to_string()).c_str());
    close();
    throw TransportError(msg);
  }
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

std::optional<LineChannel> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (fd_ < 0) return std::nullopt;
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready <= 0) return std::nullopt;
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return std::nullopt;
  set_nodelay(fd);
  return LineChannel(fd);
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

// --- BridgeServer ----------------------------------------------------------

BridgeServer::BridgeServer(const Model& model, const Endpoint& bind)
    : model_(model), host_(bind.host), listener_(bind) {
  if (sodium_init() < 0) throw Error("libsodium failed to initialise");
}

BridgeServer::~BridgeServer() { stop(); }

Endpoint BridgeServer::endpoint() const { return Endpoint{host_, port()}; }

void BridgeServer::start() {
  accept_thread_ = std::thread([this] { serve(); });
}

void BridgeServer::serve() {
  while (!stopping_.load()) {
    auto channel = listener_.accept(std::chrono::milliseconds(50));
    if (!channel) continue;
    std::lock_guard lock(mu_);
    if (stopping_.load()) break;
    const std::size_t slot = open_fds_.size();
    open_fds_.push_back(channel->fd());
    workers_.emplace_back(&BridgeServer::handle_connection, this, std::move(*channel), slot);
  }
}

void BridgeServer::stop() {
  if (stopping_.exchange(true)) return;
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) {
      if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
    }
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
  listener_.close();
}

void BridgeServer::handle_connection(LineChannel channel, std::size_t slot) {
  const Vocabulary& vocab = model_.vocabulary();
  const std::string hash = vocab_hash_hex(vocab);
  bool greeted = false;
  std::unique_ptr<DecodingSession> session;
  std::string session_id;

  auto require_session = [&](const json& req) -> DecodingSession& {
    const auto id = req.at("session").get<std::string>();
    if (!session || id != session_id) {
      throw ProtocolError("no active session '" + id + "' on this connection");
    }
    return *session;
  };

  try {
    while (auto line = channel.recv_line()) {
      json reply;
      bool close_after = false;
      try {
        const json req = json::parse(*line);
        const auto op = req.at("op").get<std::string>();
        if (op == "handshake") {
          const int version = req.at("version").get<int>();
          const auto wanted = req.value("vocab_hash", std::string());
          if (version != kBridgeVersion) {
            reply = error_reply("protocol", "version mismatch: server speaks " +
                                                std::to_string(kBridgeVersion) + ", client " +
                                                std::to_string(version));
            close_after = true;
          } else if (!wanted.empty() && wanted != hash) {
            reply = error_reply("protocol", "vocabulary mismatch: server serves " + hash);
            close_after = true;
          } else {
            greeted = true;
            reply = {{"ok", true},
                     {"version", kBridgeVersion},
                     {"vocab_hash", hash},
                     {"feature_dim", model_.feature_dim()},
                     {"vocab", json::parse(vocabulary_to_json(vocab))}};
          }
        } else if (!greeted) {
          throw ProtocolError("handshake required before '" + op + "'");
        } else if (op == "read") {
          const auto id = req.at("session").get<std::string>();
          if (session && id != session_id) {
            throw ProtocolError("session '" + session_id + "' is still active");
          }
          const auto frames = decode_frames(req.at("frames").get<std::string>());
          const auto rows = req.at("rows").get<std::size_t>();
          if (rows * model_.feature_dim() != frames.size()) {
            throw ProtocolError("read: payload does not hold " + std::to_string(rows) + " rows");
          }
          if (!session) {
            session = model_.open_session(id);
            session_id = id;
          }
          session->read(frames);
          reply = {{"ok", true}, {"frames_read", session->frames_read()}};
        } else if (op == "decode") {
          const TokenScore next = require_session(req).decode(req.at("prev_token").get<TokenId>());
          reply = {{"ok", true}, {"token", next.token}, {"score", next.score}};
        } else if (op == "commit") {
          require_session(req).commit(req.at("n").get<std::size_t>());
          reply = {{"ok", true}};
        } else if (op == "rollback") {
          require_session(req).rollback();
          reply = {{"ok", true}};
        } else if (op == "end") {
          require_session(req).end();
          session.reset();
          session_id.clear();
          reply = {{"ok", true}};
        } else {
          throw ProtocolError("unknown op '" + op + "'");
        }
      } catch (const json::exception& e) {
        reply = error_reply("protocol", std::string("malformed request: ") + e.what());
      } catch (const ProtocolError& e) {
        reply = error_reply("protocol", e.what());
      } catch (const FormatError& e) {
        reply = error_reply("protocol", e.what());
      } catch (const Error& e) {
        reply = error_reply("model", e.what());
      }
      channel.send_line(reply.dump());
      if (close_after) break;
    }
  } catch (const TransportError&) {
    // Peer vanished; nothing to report to.
  }
  std::lock_guard lock(mu_);
  open_fds_[slot] = -1;
}

// --- RemoteModel -----------------------------------------------------------

namespace {

json exchange(LineChannel& channel, const json& request, std::chrono::milliseconds timeout) {
  channel.send_line(request.dump());
  auto line = channel.recv_line(timeout);
  if (!line) throw TransportError("server closed the connection");
  json reply;
  try {
    reply = json::parse(*line);
  } catch (const json::exception&) {
    throw TransportError("malformed response from server");
  }
  if (!reply.is_object() || !reply.contains("ok") || !reply["ok"].is_boolean()) {
    throw TransportError("malformed response from server");
  }
  if (!reply["ok"].get<bool>()) {
    const auto message = reply.value("error", std::string("unspecified error"));
    if (reply.value("kind", std::string()) == "model") throw RemoteModelError(message);
    if (request.value("op", std::string()) == "handshake") throw HandshakeError(message);
    throw TransportError("server rejected request: " + message);
  }
  return reply;
}

json handshake(LineChannel& channel, const RemoteOptions& options,
               std::optional<std::uint64_t> expected) {
  std::string wanted;
  if (expected) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << *expected;
    wanted = out.str();
  }
  json reply = exchange(channel, {{"op", "handshake"}, {"version", kBridgeVersion},
                                  {"vocab_hash", wanted}},
                        options.timeout);
  try {
    if (reply.at("version").get<int>() != kBridgeVersion) {
      throw HandshakeError("server speaks protocol version " +
                           std::to_string(reply.at("version").get<int>()) + ", expected " +
                           std::to_string(kBridgeVersion));
    }
    if (!wanted.empty() && reply.at("vocab_hash").get<std::string>() != wanted) {
      throw HandshakeError("server vocabulary digest does not match");
    }
  } catch (const json::exception&) {
    throw TransportError("malformed handshake response");
  }
  return reply;
}

class RemoteSession : public DecodingSession {
 public:
  RemoteSession(LineChannel channel, std::string id, std::size_t dim,
                std::chrono::milliseconds timeout)
      : channel_(std::move(channel)), id_(std::move(id)), dim_(dim), timeout_(timeout) {}

  void read(std::span<const float> frames) override {
    if (frames.size() % dim_ != 0) {
      throw ConfigError("session: frame block is not a multiple of the feature dimension");
    }
    if (frames.empty()) return;
    const json reply = call({{"op", "read"},
                             {"session", id_},
                             {"rows", frames.size() / dim_},
                             {"frames", encode_frames(frames)}});
    frames_read_ = field<std::size_t>(reply, "frames_read");
  }

  std::size_t frames_read() const override { return frames_read_; }

  TokenScore decode(TokenId prev) override {
    const json reply = call({{"op", "decode"}, {"session", id_}, {"prev_token", prev}});
    return {field<TokenId>(reply, "token"), field<float>(reply, "score")};
  }

  void commit(std::size_t n) override {
    if (n == 0) return;
    call({{"op", "commit"}, {"session", id_}, {"n", n}});
  }

  void rollback() override { call({{"op", "rollback"}, {"session", id_}}); }

  void end() override {
    if (ended_) return;
    call({{"op", "end"}, {"session", id_}});
    ended_ = true;
  }

 private:
  json call(const json& request) { return exchange(channel_, request, timeout_); }

  template <typename T>
  static T field(const json& reply, const char* name) {
    try {
      return reply.at(name).get<T>();
    } catch (const json::exception&) {
      throw TransportError(std::string("response lacks field '") + name + "'");
    }
  }

  LineChannel channel_;
  std::string id_;
  std::size_t dim_;
  std::chrono::milliseconds timeout_;
  std::size_t frames_read_ = 0;
  bool ended_ = false;
};

}  // namespace

RemoteModel::RemoteModel(Endpoint endpoint, RemoteOptions options, Vocabulary vocab,
                         std::size_t dim)
    : endpoint_(std::move(endpoint)),
      options_(options),
      vocab_(std::move(vocab)),
      feature_dim_(dim) {}

std::unique_ptr<RemoteModel> RemoteModel::connect(const Endpoint& endpoint,
                                                  RemoteOptions options) {
  if (sodium_init() < 0) throw Error("libsodium failed to initialise");
  LineChannel probe = connect_tcp(endpoint, options.timeout);
  const json reply = handshake(probe, options, options.expected_vocab_hash);
  try {
    Vocabulary vocab = vocabulary_from_json(reply.at("vocab").dump());
    if (vocab_hash_hex(vocab) != reply.at("vocab_hash").get<std::string>()) {
      throw HandshakeError("announced vocabulary digest does not match its contents");
    }
    const auto dim = reply.at("feature_dim").get<std::size_t>();
    return std::unique_ptr<RemoteModel>(new RemoteModel(endpoint, options, std::move(vocab), dim));
  } catch (const json::exception&) {
    throw TransportError("malformed handshake response");
  } catch (const FormatError& e) {
    throw TransportError(std::string("malformed vocabulary in handshake: ") + e.what());
  }
}

std::unique_ptr<DecodingSession> RemoteModel::open_session(std::string_view utterance_id) const {
  LineChannel channel = connect_tcp(endpoint_, options_.timeout);
  handshake(channel, options_, vocab_.hash());
  return std::make_unique<RemoteSession>(std::move(channel), std::string(utterance_id),
                                         feature_dim_, options_.timeout);
}

std::unique_ptr<Model> remote_model(std::string_view endpoint, RemoteOptions options) {
  return RemoteModel::connect(Endpoint::parse(endpoint), options);
}

}  // namespace simulst
