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

// What the decoding engine drives: a Model opens one DecodingSession per
// utterance. EncoderDecoderModel adapts the encode / decode_step /
// init_decoder_state triple into a session that re-encodes the whole
// prefix on every read and keeps the decoder state cached between reads.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simulst/error.h"
#include "simulst/types.h"

namespace simulst {

// h^t: one row per encoder position, H = ceil(frames / 4).
struct EncoderStates {
  std::vector<float> hidden;  // H x E row-major
  std::size_t num_states = 0;
  std::size_t dim = 0;
  std::size_t source_frames_consumed = 0;

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(hidden).subspan(i * dim, dim);
  }
  bool operator==(const EncoderStates&) const = default;
};

struct RecurrentState {
  std::vector<float> h;
  std::vector<float> c;
  bool operator==(const RecurrentState&) const = default;
};

// z_j: per-layer recurrent state plus the last attention context.
struct DecoderState {
  std::vector<RecurrentState> layers;
  std::vector<float> context;
  bool operator==(const DecoderState&) const = default;
};

struct DecodeOutput {
  DecoderState state;
  std::vector<float> scores;     // one per vocabulary entry
  std::vector<float> attention;  // one per encoder position, sums to 1
};

struct TokenScore {
  TokenId token = 0;
  float score = 0.0f;
  bool operator==(const TokenScore&) const = default;
};

// Greedy prediction: argmax with the lowest id winning ties.
TokenScore predict(std::span<const float> scores);

// A session failed in a way unrelated to model arithmetic (lost connection,
// dead peer). The engine surfaces these together with the partial trace.
class SessionError : public Error {
 public:
  using Error::Error;
};

// One utterance's worth of decoding state. Calls are strictly ordered.
//
// read() appends frames and makes the encoder see the whole buffer.
// decode() predicts the next token from the newest tentative state (or the
// committed one) and pushes a new tentative state. commit(n) promotes the
// first n tentative states; rollback() drops every tentative state, so the
// decoder is back at the last committed token.
class DecodingSession {
 public:
  virtual ~DecodingSession() = default;

  virtual void read(std::span<const float> frames) = 0;
  virtual std::size_t frames_read() const = 0;
  virtual TokenScore decode(TokenId prev) = 0;
  virtual void commit(std::size_t n) = 0;
  virtual void rollback() = 0;
  virtual void end() = 0;
};

class Model {
 public:
  virtual ~Model() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual std::unique_ptr<DecodingSession> open_session(std::string_view utterance_id) const = 0;
};

class EncoderDecoderModel : public Model {
 public:
  // Throws ArgumentError on an empty prefix.
  virtual EncoderStates encode(const AudioFeatures& prefix) const = 0;
  // Throws StateError when z_prev does not fit the model.
  virtual DecodeOutput decode_step(const EncoderStates& enc, const DecoderState& z_prev,
                                   TokenId y_prev) const = 0;
  virtual DecoderState init_decoder_state() const = 0;

  std::unique_ptr<DecodingSession> open_session(std::string_view utterance_id) const override;
};

// Session over an in-process EncoderDecoderModel.
class LocalSession : public DecodingSession {
 public:
  explicit LocalSession(const EncoderDecoderModel& model);

  void read(std::span<const float> frames) override;
  std::size_t frames_read() const override { return frames_; }
  TokenScore decode(TokenId prev) override;
  void commit(std::size_t n) override;
  void rollback() override;
  void end() override;

  std::size_t pending() const { return pending_.size(); }
  std::size_t encoder_runs() const { return encoder_runs_; }

 private:
  const EncoderDecoderModel& model_;
  std::vector<float> buffer_;
  std::size_t frames_ = 0;
  std::size_t encoder_runs_ = 0;
  bool has_encoding_ = false;
  EncoderStates encoding_;
  DecoderState committed_;
  std::vector<DecoderState> pending_;
};

}  // namespace simulst
