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

#include "simulst/latency.h"

#include <string>

#include "simulst/error.h"

namespace simulst {

std::size_t trace_cutoff(const DecodingTrace& trace) {
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (trace.steps[i].frames_read >= trace.src_len) return i + 1;
  }
  return trace.steps.size();
}

namespace {

Lagging token_al(const DecodingTrace& trace, std::size_t target_len, bool weighted) {
  if (trace.steps.empty()) throw MetricError("AL: empty trace");
  if (target_len == 0) throw ArgumentError("AL: target length is zero (gamma = 0)");
  if (trace.src_len == 0) throw MetricError("AL: source length is zero");
  const std::size_t tau = trace_cutoff(trace);
  const auto src = static_cast<double>(trace.src_len);
  const auto tgt = static_cast<double>(target_len);
  double sum = 0.0;
  for (std::size_t i = 0; i < tau; ++i) {
    const TraceStep& step = trace.steps[i];
    // (t-1)/gamma written as (t-1)|X|/|Y| keeps integer inputs exact.
    double term = static_cast<double>(step.frames_read) - static_cast<double>(i) * src / tgt;
    if (weighted) term *= static_cast<double>(step.emitted);
    sum += term;
  }
  const double frames = sum / static_cast<double>(tau);
  return {frames, frames * trace.frame_ms};
}

double word_al(const WordDelaySequence& words, std::size_t gamma_words) {
  if (words.delays_ms.empty()) throw MetricError("AL: no completed words");
  if (gamma_words == 0) throw ArgumentError("AL: word count for gamma is zero");
  if (!(words.source_ms > 0.0)) throw MetricError("AL: source duration must be positive");
  std::size_t tau = words.delays_ms.size();
  for (std::size_t i = 0; i < words.delays_ms.size(); ++i) {
    if (words.delays_ms[i] >= words.source_ms) {
      tau = i + 1;
      break;
    }
  }
  const auto n = static_cast<double>(gamma_words);
  double sum = 0.0;
  for (std::size_t i = 0; i < tau; ++i) {
    sum += words.delays_ms[i] - static_cast<double>(i) * words.source_ms / n;
  }
  return sum / static_cast<double>(tau);
}

}  // namespace

Lagging al_original(const DecodingTrace& trace, std::size_t target_len) {
  return token_al(trace, target_len, false);
}

Lagging al_weighted(const DecodingTrace& trace, std::size_t target_len) {
  return token_al(trace, target_len, true);
}

WordDelaySequence word_delays(const Hypothesis& hyp, const DecodingTrace& trace,
                              const Vocabulary& vocab, bool ended_with_eos,
                              CharWordCommit mode) {
  if (trace.steps.empty()) throw MetricError("word delays: empty trace");
  if (hyp.token_ids.size() != hyp.emitted_at_step.size()) {
    throw ArgumentError("word delays: hypothesis tokens and steps differ in length");
  }
  std::vector<TimedToken> timed;
  timed.reserve(hyp.size() + 1);
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    timed.push_back({hyp.token_ids[i], hyp.emitted_at_step[i]});
  }
  if (ended_with_eos) timed.push_back({vocab.eos(), trace.steps.back().t});

  WordDelaySequence out;
  out.source_ms = static_cast<double>(trace.src_len) * trace.frame_ms;
  for (const auto& word : word_boundaries(timed, vocab, mode)) {
    if (word.step < 1 || word.step > trace.steps.size()) {
      throw ArgumentError("word delays: token step " + std::to_string(word.step) +
                          " is outside the trace");
    }
    const TraceStep& step = trace.steps[word.step - 1];
    out.delays_ms.push_back(static_cast<double>(step.frames_read) * trace.frame_ms);
  }
  return out;
}

double al_word_adaptive(const WordDelaySequence& words, std::size_t ref_word_count) {
  return word_al(words, ref_word_count);
}

double al_word_original(const WordDelaySequence& words) {
  return word_al(words, words.delays_ms.size());
}

std::string_view al_variant_name(AlVariant v) {
  switch (v) {
    case AlVariant::kAdaptive: return "adaptive";
    case AlVariant::kOriginal: return "original";
    case AlVariant::kToken: return "token";
    case AlVariant::kTokenWeighted: return "token_weighted";
  }
  return "adaptive";
}

AlVariant parse_al_variant(std::string_view name) {
  if (name == "adaptive") return AlVariant::kAdaptive;
  if (name == "original") return AlVariant::kOriginal;
  if (name == "token") return AlVariant::kToken;
  if (name == "token_weighted") return AlVariant::kTokenWeighted;
  throw ArgumentError("unknown AL variant '" + std::string(name) + "'");
}

}  // namespace simulst
