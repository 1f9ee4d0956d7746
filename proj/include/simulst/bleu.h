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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simulst {

// Sufficient statistics for corpus BLEU with one reference per segment.
struct BleuStats {
  static constexpr std::size_t kMaxOrder = 4;

  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> totals{};
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  void add(std::string_view hypothesis, std::string_view reference);
  // Percentage in [0, 100]: brevity penalty times the geometric mean of the
  // clipped 1..4-gram precisions, no smoothing.
  double score() const;
};

// Whitespace-tokenized corpus BLEU. Throws ArgumentError on an empty corpus
// or mismatched counts.
double corpus_bleu(std::span<const std::string> hypotheses,
                   std::span<const std::string> references);

}  // namespace simulst
