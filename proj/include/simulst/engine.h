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

// The online read/write decoding loop and the offline greedy baseline.

#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <string_view>

#include "simulst/model.h"
#include "simulst/types.h"

namespace simulst {

enum class StopReason { kEosAfterFullRead, kMaxLength };

std::string_view stop_reason_name(StopReason r);
StopReason parse_stop_reason(std::string_view name);

struct OnlineResult {
  Hypothesis hypothesis;
  DecodingTrace trace;
  StopReason stop_reason = StopReason::kEosAfterFullRead;
};

// Content tokens allowed for an utterance: floor(ratio * ceil(|X| / 4)).
// </s> never counts.
std::size_t max_output_length(std::size_t src_len, double max_length_ratio);

// Thrown when the session fails mid-utterance. Carries everything committed
// before the failure.
class DecodingAborted : public SessionError {
 public:
  DecodingAborted(const std::string& what, OnlineResult partial)
      : SessionError(what), partial_(std::move(partial)) {}
  const OnlineResult& partial() const { return partial_; }

 private:
  OnlineResult partial_;
};

// Runs the (k, s, N) schedule over `features`: at step t the session holds
// x_{<=g(t)}, then up to N tokens are decoded greedily. An early </s> (source
// not fully read) commits only the tokens before it, drops it, and moves on to
// the next read. Stops at </s> with the full source read, or when the output
// reaches max_output_length.
//
// Throws ConfigError on a feature dimension mismatch and DecodingAborted when
// the session fails.
OnlineResult online_decode(const Model& model, const AudioFeatures& features,
                           const EngineConfig& config, std::string_view utterance_id = "");

// Full-source greedy decoding: one read of all frames, then argmax tokens
// until </s> or max_output_length.
Hypothesis offline_greedy(const Model& model, const AudioFeatures& features,
                          double max_length_ratio, std::string_view utterance_id = "");

// The trace of a decoder that waits for the whole source: one step that reads
// |X| frames and emits everything.
DecodingTrace full_wait_trace(std::size_t src_len, double frame_ms, std::size_t emitted);

}  // namespace simulst
