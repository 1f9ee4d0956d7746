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

#include "simulst/model.h"

namespace simulst {

TokenScore predict(std::span<const float> scores) {
  if (scores.empty()) throw ArgumentError("predict: empty score vector");
  TokenScore best{0, scores[0]};
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > best.score) best = {static_cast<TokenId>(i), scores[i]};
  }
  return best;
}

std::unique_ptr<DecodingSession> EncoderDecoderModel::open_session(std::string_view) const {
  return std::make_unique<LocalSession>(*this);
}

LocalSession::LocalSession(const EncoderDecoderModel& model)
    : model_(model), committed_(model.init_decoder_state()) {}

void LocalSession::read(std::span<const float> frames) {
  const std::size_t dim = model_.feature_dim();
  if (frames.size() % dim != 0) {
    throw ConfigError("session: frame block is not a multiple of the feature dimension");
  }
  if (frames.empty()) return;
  buffer_.insert(buffer_.end(), frames.begin(), frames.end());
  frames_ += frames.size() / dim;
  encoding_ = model_.encode(AudioFeatures(buffer_, frames_, dim));
  has_encoding_ = true;
  ++encoder_runs_;
}

TokenScore LocalSession::decode(TokenId prev) {
  if (!has_encoding_) throw StateError("session: decode before any frames were read");
  const DecoderState& base = pending_.empty() ? committed_ : pending_.back();
  DecodeOutput out = model_.decode_step(encoding_, base, prev);
  pending_.push_back(std::move(out.state));
  return predict(out.scores);
}

void LocalSession::commit(std::size_t n) {
  if (n == 0) return;
  if (n > pending_.size()) throw StateError("session: commit exceeds pending decodes");
  committed_ = std::move(pending_[n - 1]);
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(n));
}

void LocalSession::rollback() { pending_.clear(); }

void LocalSession::end() {
  pending_.clear();
  buffer_.clear();
  buffer_.shrink_to_fit();
  has_encoding_ = false;
}

}  // namespace simulst
