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

// Shared domain types: source features, vocabularies, read/write policies,
// hypotheses and per-step decoding traces.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simulst {

using TokenId = std::int32_t;

// Source sequence: num_frames x dim row-major features plus the duration of
// one frame. Immutable once constructed.
class AudioFeatures {
 public:
  static constexpr double kDefaultFrameMs = 10.0;

  AudioFeatures(std::vector<float> values, std::size_t num_frames,
                std::size_t dim, double frame_ms = kDefaultFrameMs);

  std::size_t num_frames() const { return num_frames_; }
  std::size_t dim() const { return dim_; }
  double frame_ms() const { return frame_ms_; }
  double duration_ms() const { return static_cast<double>(num_frames_) * frame_ms_; }

  std::span<const float> values() const { return values_; }
  std::span<const float> row(std::size_t frame) const;
  // Frames [begin, end) as one contiguous block.
  std::span<const float> rows(std::size_t begin, std::size_t end) const;
  // The first n frames, x_{<=n}.
  AudioFeatures prefix(std::size_t n) const;

 private:
  std::vector<float> values_;
  std::size_t num_frames_;
  std::size_t dim_;
  double frame_ms_;
};

enum class Granularity { kChar, kBpe };

std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view name);

// Ordered, duplicate-free token inventory; ids are positions 0..V-1.
class Vocabulary {
 public:
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";

  Vocabulary(std::vector<std::string> tokens, TokenId bos_id, TokenId eos_id,
             Granularity granularity);

  std::size_t size() const { return tokens_.size(); }
  TokenId bos() const { return bos_id_; }
  TokenId eos() const { return eos_id_; }
  Granularity granularity() const { return granularity_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }
  bool is_special(TokenId id) const { return id == bos_id_ || id == eos_id_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  // Throws UnknownTokenError when absent.
  TokenId id(std::string_view token) const;

  // Stable 64-bit FNV-1a digest of granularity, specials and token list.
  std::uint64_t hash() const;

  bool operator==(const Vocabulary& other) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_id_;
  TokenId eos_id_;
  Granularity granularity_;
};

// The (k, s, N) read/write triple: wait frames, stride frames, tokens per
// write.
struct PolicyConfig {
  std::size_t k = 1;
  std::size_t s = 1;
  std::size_t n = 1;

  void validate() const;
  bool operator==(const PolicyConfig&) const = default;
};

struct EngineConfig {
  PolicyConfig policy;
  double max_length_ratio = 1.0;

  void validate() const;
};

// Emitted tokens Y and the 1-based decoding step that emitted each one.
struct Hypothesis {
  std::vector<TokenId> token_ids;
  std::vector<std::size_t> emitted_at_step;

  std::size_t size() const { return token_ids.size(); }
  bool empty() const { return token_ids.empty(); }
  bool operator==(const Hypothesis&) const = default;
};

struct TraceStep {
  std::size_t t = 0;            // 1-based step index
  std::size_t frames_read = 0;  // g(t)
  std::size_t emitted = 0;      // w_t

  bool operator==(const TraceStep&) const = default;
};

struct DecodingTrace {
  std::vector<TraceStep> steps;
  std::size_t src_len = 0;
  double frame_ms = AudioFeatures::kDefaultFrameMs;

  // q(t) for every step.
  std::vector<std::size_t> cumulative_emitted() const;
  std::size_t total_emitted() const;
  bool operator==(const DecodingTrace&) const = default;
};

// Checks the trace against g(t) = min(k + (t-1)s, |X|) and 0 <= w_t <= N.
// Returns one message per violated invariant; empty means the trace conforms.
std::vector<std::string> validate_trace(const DecodingTrace& trace,
                                        const PolicyConfig& policy);

// As above, additionally requiring sum(w_t) == hypothesis_len.
std::vector<std::string> validate_trace(const DecodingTrace& trace,
                                        const PolicyConfig& policy,
                                        std::size_t hypothesis_len);

}  // namespace simulst
