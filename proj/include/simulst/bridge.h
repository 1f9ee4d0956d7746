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

// Wire protocol for serving a model from another process.
//
// One JSON object per line over a TCP byte stream. Every request gets exactly
// one response; responses carry "ok" and, on failure, "error" plus "kind"
// ("model" for failures inside the served model, "protocol" otherwise).
//
//   {"op":"handshake","version":1,"vocab_hash":"<hex>|"}
//       -> {"ok":true,"version":1,"vocab_hash":"<hex>","feature_dim":D,"vocab":{...}}
//   {"op":"read","session":"<id>","rows":n,"frames":"<base64 f32 LE>"}
//       -> {"ok":true,"frames_read":total}
//   {"op":"decode","session":"<id>","prev_token":id} -> {"ok":true,"token":id,"score":x}
//   {"op":"commit","session":"<id>","n":n}            -> {"ok":true}
//   {"op":"rollback","session":"<id>"}                -> {"ok":true}
//   {"op":"end","session":"<id>"}                     -> {"ok":true}
//
// Only frames not yet sent travel with each read. The served side owns the
// decoder state; commit/rollback map onto DecodingSession.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "simulst/model.h"

namespace simulst {

inline constexpr int kBridgeVersion = 1;

// Connection-level failure: refused, closed, timed out, garbled.
class TransportError : public SessionError {
 public:
  using SessionError::SessionError;
};

// The peer speaks a different protocol version or serves another vocabulary.
class HandshakeError : public TransportError {
 public:
  using TransportError::TransportError;
};

// The served model reported an error while handling a request.
class RemoteModelError : public SessionError {
 public:
  using SessionError::SessionError;
};

std::string encode_frames(std::span<const float> frames);
std::vector<float> decode_frames(std::string_view base64);

std::string vocab_hash_hex(const Vocabulary& vocab);

// Blocking line I/O over a connected socket. Owns the descriptor.
class LineChannel {
 public:
  LineChannel() = default;
  explicit LineChannel(int fd);
  ~LineChannel();
  LineChannel(LineChannel&& other) noexcept;
  LineChannel& operator=(LineChannel&& other) noexcept;
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  bool is_open() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  // Throws TransportError on failure.
  void send_line(std::string_view line);
  // Returns nullopt on orderly close; throws TransportError on timeout or
  // socket error. A zero timeout waits forever.
  std::optional<std::string> recv_line(std::chrono::milliseconds timeout = {});

  void shutdown();
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // Accepts "host:port" or "tcp://host:port".
  static Endpoint parse(std::string_view text);
  std::string to_string() const;
};

LineChannel connect_tcp(const Endpoint& endpoint, std::chrono::milliseconds timeout);

// Bound, listening TCP socket.
class TcpListener {
 public:
  explicit TcpListener(const Endpoint& endpoint);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Waits up to `timeout` for a connection.
  std::optional<LineChannel> accept(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Serves `model` over TCP, one thread per connection. The model must outlive
// the server and be safe for concurrent read-only use.
class BridgeServer {
 public:
  BridgeServer(const Model& model, const Endpoint& bind);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  Endpoint endpoint() const;

  // Accept loop on a background thread.
  void start();
  // Accept loop on the calling thread until stop().
  void serve();
  void stop();

 private:
  void handle_connection(LineChannel channel, std::size_t slot);

  const Model& model_;
  std::string host_;
  TcpListener listener_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> open_fds_;
};

struct RemoteOptions {
  std::chrono::milliseconds timeout{30000};
  // When set, the server must announce this vocabulary digest.
  std::optional<std::uint64_t> expected_vocab_hash;
};

// Model whose sessions each run over their own connection to a BridgeServer.
class RemoteModel : public Model {
 public:
  // Connects once to learn the vocabulary and feature dimension.
  static std::unique_ptr<RemoteModel> connect(const Endpoint& endpoint,
                                              RemoteOptions options = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t feature_dim() const override { return feature_dim_; }
  std::unique_ptr<DecodingSession> open_session(std::string_view utterance_id) const override;

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  RemoteModel(Endpoint endpoint, RemoteOptions options, Vocabulary vocab, std::size_t dim);

  Endpoint endpoint_;
  RemoteOptions options_;
  Vocabulary vocab_;
  std::size_t feature_dim_;
};

std::unique_ptr<Model> remote_model(std::string_view endpoint, RemoteOptions options = {});

}  // namespace simulst
