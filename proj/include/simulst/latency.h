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

// Average Lagging over decoding traces (token level) and over committed
// word delays (word level).
//
// Token level, with gamma = target_len / |X| and tau the cut-off step:
//   original: (1/tau) sum_{t<=tau} [g(t) - (t-1)/gamma]
//   weighted: (1/tau) sum_{t<=tau} [g(t) - (t-1)/gamma] * w_t
// Word level uses per-word delays d_i in ms, gamma = words / source_ms and
// tau' = the first word whose delay reaches the source duration (all words
// when none does). Negative values are returned unchanged.

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "simulst/tokenizer.h"
#include "simulst/types.h"

namespace simulst {

struct Lagging {
  double frames = 0.0;
  double ms = 0.0;
};

// First step that has read the whole source; the step count when the trace
// stops before that.
std::size_t trace_cutoff(const DecodingTrace& trace);

// Throws MetricError when target_len is zero or the trace is empty.
Lagging al_original(const DecodingTrace& trace, std::size_t target_len);
Lagging al_weighted(const DecodingTrace& trace, std::size_t target_len);

struct WordDelaySequence {
  std::vector<double> delays_ms;
  double source_ms = 0.0;
};

// Charges each completed word with g(step) * frame_ms of the step at which it
// completed. `ended_with_eos` places a </s> at the final trace step.
WordDelaySequence word_delays(const Hypothesis& hyp, const DecodingTrace& trace,
                              const Vocabulary& vocab, bool ended_with_eos,
                              CharWordCommit mode = CharWordCommit::kAtSeparator);

// gamma from the reference word count. Throws MetricError on an empty delay
// sequence or a zero reference count.
double al_word_adaptive(const WordDelaySequence& words, std::size_t ref_word_count);
// gamma from the hypothesis word count.
double al_word_original(const WordDelaySequence& words);

enum class AlVariant {
  kAdaptive,       // word level, reference length
  kOriginal,       // word level, hypothesis length
  kToken,          // token level, unweighted
  kTokenWeighted,  // token level, weighted by w_t
};

std::string_view al_variant_name(AlVariant v);
AlVariant parse_al_variant(std::string_view name);

}  // namespace simulst
