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

#include "simulst/engine.h"

#include <cmath>

#include "simulst/error.h"
#include "simulst/policy.h"

namespace simulst {

std::string_view stop_reason_name(StopReason r) {
  return r == StopReason::kEosAfterFullRead ? "eos_after_full_read" : "max_length";
}

StopReason parse_stop_reason(std::string_view name) {
  if (name == "eos_after_full_read") return StopReason::kEosAfterFullRead;
  if (name == "max_length") return StopReason::kMaxLength;
  throw FormatError("unknown stop reason '" + std::string(name) + "'");
}

std::size_t max_output_length(std::size_t src_len, double max_length_ratio) {
  const std::size_t encoder_len = (src_len + 3) / 4;
  // The epsilon keeps products like 0.7 * 10 from flooring to 6.
  return static_cast<std::size_t>(
      std::floor(max_length_ratio * static_cast<double>(encoder_len) + 1e-9));
}

namespace {

void check_dims(const Model& model, const AudioFeatures& features) {
  if (features.dim() != model.feature_dim()) {
    throw ConfigError("features have dimension " + std::to_string(features.dim()) +
                      ", model expects " + std::to_string(model.feature_dim()));
  }
}

}  // namespace

OnlineResult online_decode(const Model& model, const AudioFeatures& features,
                           const EngineConfig& config, std::string_view utterance_id) {
  config.validate();
  check_dims(model, features);
  const Vocabulary& vocab = model.vocabulary();
  const std::size_t src_len = features.num_frames();
  const Schedule schedule(config.policy, src_len);
  const std::size_t limit = max_output_length(src_len, config.max_length_ratio);

  OnlineResult result;
  result.trace.src_len = src_len;
  result.trace.frame_ms = features.frame_ms();
  Hypothesis& hyp = result.hypothesis;

  try {
    auto session = model.open_session(utterance_id);
    TokenId last = vocab.bos();
    std::size_t frames_read = 0;
    for (std::size_t t = 1;; ++t) {
      const std::size_t g = schedule.frames_at_step(t);
      // Re-encode only when new frames arrive; a saturated schedule keeps
      // the full-source encoding.
      if (g > frames_read) {
        session->read(features.rows(frames_read, g));
        frames_read = g;
      }
      const bool full = g == src_len;

      std::size_t written = 0;
      bool saw_eos = false;
      while (written < config.policy.n && hyp.size() < limit) {
        const TokenScore next = session->decode(last);
        if (next.token == vocab.eos()) {
          saw_eos = true;
          break;
        }
        hyp.token_ids.push_back(next.token);
        hyp.emitted_at_step.push_back(t);
        last = next.token;
        ++written;
      }
      session->commit(written);
      if (saw_eos) session->rollback();
      result.trace.steps.push_back({t, g, written});

      if (saw_eos && full) {
        result.stop_reason = StopReason::kEosAfterFullRead;
        break;
      }
      if (hyp.size() >= limit) {
        result.stop_reason = StopReason::kMaxLength;
        break;
      }
    }
    session->end();
  } catch (const SessionError& e) {
    // Drop tokens of the step that was in flight so trace and hypothesis agree.
    const std::size_t committed = result.trace.total_emitted();
    hyp.token_ids.resize(committed);
    hyp.emitted_at_step.resize(committed);
    throw DecodingAborted(e.what(), std::move(result));
  }
  return result;
}

Hypothesis offline_greedy(const Model& model, const AudioFeatures& features,
                          double max_length_ratio, std::string_view utterance_id) {
  if (!(max_length_ratio > 0.0)) throw ArgumentError("max_length_ratio must be positive");
  check_dims(model, features);
  const Vocabulary& vocab = model.vocabulary();
  const std::size_t limit = max_output_length(features.num_frames(), max_length_ratio);

  Hypothesis hyp;
  auto session = model.open_session(utterance_id);
  session->read(features.values());
  TokenId last = vocab.bos();
  while (hyp.size() < limit) {
    const TokenScore next = session->decode(last);
    if (next.token == vocab.eos()) break;
    session->commit(1);
    hyp.token_ids.push_back(next.token);
    hyp.emitted_at_step.push_back(1);
    last = next.token;
  }
  session->end();
  return hyp;
}

DecodingTrace full_wait_trace(std::size_t src_len, double frame_ms, std::size_t emitted) {
  DecodingTrace trace;
  trace.src_len = src_len;
  trace.frame_ms = frame_ms;
  trace.steps.push_back({1, src_len, emitted});
  return trace;
}

}  // namespace simulst
