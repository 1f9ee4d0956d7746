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

#include "simulst/bleu.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "simulst/error.h"

namespace simulst {

namespace {

std::vector<std::string> whitespace_split(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(std::move(w));
  return words;
}

std::unordered_map<std::string, std::size_t> count_ngrams(const std::vector<std::string>& words,
                                                          std::size_t order) {
  std::unordered_map<std::string, std::size_t> counts;
  if (words.size() < order) return counts;
  for (std::size_t i = 0; i + order <= words.size(); ++i) {
    std::string key = words[i];
    for (std::size_t j = 1; j < order; ++j) {
      key += '\x1f';
      key += words[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

void BleuStats::add(std::string_view hypothesis, std::string_view reference) {
  const auto hyp = whitespace_split(hypothesis);
  const auto ref = whitespace_split(reference);
  hyp_length += hyp.size();
  ref_length += ref.size();
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const auto hyp_counts = count_ngrams(hyp, n);
    const auto ref_counts = count_ngrams(ref, n);
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
    }
    totals[n - 1] += hyp.size() >= n ? hyp.size() - n + 1 : 0;
  }
}

double BleuStats::score() const {
  if (hyp_length == 0) return 0.0;
  double log_precision = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
  }
  log_precision /= static_cast<double>(kMaxOrder);
  const double brevity =
      hyp_length < ref_length
          ? 1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length)
          : 0.0;
  return 100.0 * std::exp(log_precision + brevity);
}

double corpus_bleu(std::span<const std::string> hypotheses,
                   std::span<const std::string> references) {
  if (hypotheses.empty()) throw ArgumentError("BLEU: empty corpus");
  if (hypotheses.size() != references.size()) {
    throw ArgumentError("BLEU: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                        std::to_string(references.size()) + " references");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) stats.add(hypotheses[i], references[i]);
  return stats.score();
}

}  // namespace simulst
