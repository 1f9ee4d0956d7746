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

#include "simulst/types.h"

#include <cmath>
#include <sstream>

#include "simulst/error.h"
#include "simulst/policy.h"

namespace simulst {

AudioFeatures::AudioFeatures(std::vector<float> values, std::size_t num_frames,
                             std::size_t dim, double frame_ms)
    : values_(std::move(values)),
      num_frames_(num_frames),
      dim_(dim),
      frame_ms_(frame_ms) {
  if (num_frames_ < 1) throw ArgumentError("features: need at least one frame");
  if (dim_ < 1) throw ArgumentError("features: dimension must be >= 1");
  if (!(frame_ms_ > 0.0) || !std::isfinite(frame_ms_)) {
    throw ArgumentError("features: frame_ms must be positive and finite");
  }
  if (values_.size() != num_frames_ * dim_) {
    throw ArgumentError("features: value count " + std::to_string(values_.size()) +
                        " != " + std::to_string(num_frames_) + "x" +
                        std::to_string(dim_));
  }
  for (float v : values_) {
    if (!std::isfinite(v)) throw ArgumentError("features: non-finite value");
  }
}

std::span<const float> AudioFeatures::row(std::size_t frame) const {
  return rows(frame, frame + 1);
}

std::span<const float> AudioFeatures::rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > num_frames_) {
    throw ArgumentError("features: frame range out of bounds");
  }
  return std::span<const float>(values_).subspan(begin * dim_, (end - begin) * dim_);
}

AudioFeatures AudioFeatures::prefix(std::size_t n) const {
  auto block = rows(0, n);
  return AudioFeatures(std::vector<float>(block.begin(), block.end()), n, dim_,
                       frame_ms_);
}

std::string_view granularity_name(Granularity g) {
  return g == Granularity::kChar ? "char" : "bpe";
}

Granularity parse_granularity(std::string_view name) {
  if (name == "char") return Granularity::kChar;
  if (name == "bpe") return Granularity::kBpe;
  throw ArgumentError("unknown granularity '" + std::string(name) + "'");
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId bos_id,
                       TokenId eos_id, Granularity granularity)
    : tokens_(std::move(tokens)),
      bos_id_(bos_id),
      eos_id_(eos_id),
      granularity_(granularity) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw ArgumentError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
  if (!contains(eos_id_)) throw ArgumentError("vocabulary: eos id out of range");
  if (!contains(bos_id_)) throw ArgumentError("vocabulary: bos id out of range");
}

const std::string& Vocabulary::token(TokenId id) const {
  if (!contains(id)) {
    throw ArgumentError("vocabulary: token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  throw UnknownTokenError("unknown token '" + std::string(token) + "'");
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    // Separator byte outside any UTF-8 sequence.
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  mix(granularity_name(granularity_));
  mix(std::to_string(bos_id_));
  mix(std::to_string(eos_id_));
  for (const auto& t : tokens_) mix(t);
  return h;
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return tokens_ == other.tokens_ && bos_id_ == other.bos_id_ &&
         eos_id_ == other.eos_id_ && granularity_ == other.granularity_;
}

void PolicyConfig::validate() const {
  if (k < 1 || s < 1 || n < 1) {
    throw ArgumentError("policy: k, s and N must all be >= 1 (got k=" +
                        std::to_string(k) + ", s=" + std::to_string(s) +
                        ", N=" + std::to_string(n) + ")");
  }
}

void EngineConfig::validate() const {
  policy.validate();
  if (!(max_length_ratio > 0.0) || !std::isfinite(max_length_ratio)) {
    throw ArgumentError("engine: max_length_ratio must be positive");
  }
}

std::vector<std::size_t> DecodingTrace::cumulative_emitted() const {
  std::vector<std::size_t> q;
  q.reserve(steps.size());
  std::size_t total = 0;
  for (const auto& step : steps) {
    total += step.emitted;
    q.push_back(total);
  }
  return q;
}

std::size_t DecodingTrace::total_emitted() const {
  std::size_t total = 0;
  for (const auto& step : steps) total += step.emitted;
  return total;
}

std::vector<std::string> validate_trace(const DecodingTrace& trace,
                                        const PolicyConfig& policy) {
  std::vector<std::string> violations;
  if (trace.steps.empty()) {
    violations.push_back("trace has no steps");
    return violations;
  }
  if (trace.src_len < 1) {
    violations.push_back("|X| must be >= 1");
    return violations;
  }
  const Schedule schedule(policy, trace.src_len);
  std::size_t prev_g = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& step = trace.steps[i];
    const std::size_t t = i + 1;
    std::ostringstream msg;
    if (step.t != t) {
      msg << "step " << t << " is labelled t=" << step.t;
      violations.push_back(msg.str());
      msg.str("");
    }
    const std::size_t expected = schedule.frames_at_step(t);
    if (step.frames_read != expected) {
      msg << "g(" << t << ")=" << step.frames_read << " != " << expected;
      violations.push_back(msg.str());
      msg.str("");
    }
    if (step.frames_read > trace.src_len) {
      msg << "g(" << t << ")=" << step.frames_read << " > |X|=" << trace.src_len;
      violations.push_back(msg.str());
      msg.str("");
    }
    if (step.frames_read < prev_g) {
      msg << "g(" << t << ") decreases from " << prev_g;
      violations.push_back(msg.str());
      msg.str("");
    }
    if (step.emitted > policy.n) {
      msg << "w_" << t << "=" << step.emitted << " > N=" << policy.n;
      violations.push_back(msg.str());
    }
    prev_g = step.frames_read;
  }
  return violations;
}

std::vector<std::string> validate_trace(const DecodingTrace& trace,
                                        const PolicyConfig& policy,
                                        std::size_t hypothesis_len) {
  auto violations = validate_trace(trace, policy);
  const std::size_t total = trace.total_emitted();
  if (total != hypothesis_len) {
    violations.push_back("sum(w_t)=" + std::to_string(total) +
                         " != |Y|=" + std::to_string(hypothesis_len));
  }
  return violations;
}

}  // namespace simulst
