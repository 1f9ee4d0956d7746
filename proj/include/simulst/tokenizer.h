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

// Character and BPE tokenization, detokenization, and word completion
// detection for word-level delay accounting.
//
// BPE pieces that do not end a word carry an "@@" suffix ("Hel@@ lo"), so a
// word is known to be complete as soon as its own last piece is emitted.

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simulst/types.h"

namespace simulst {

inline constexpr std::string_view kContinuation = "@@";
inline constexpr std::string_view kSpaceToken = " ";

class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  BpeModel() = default;
  explicit BpeModel(std::vector<Merge> merges);

  const std::vector<Merge>& merges() const { return merges_; }
  bool empty() const { return merges_.empty(); }

  // Splits one word into pieces by repeatedly merging the adjacent pair with
  // the lowest merge rank. No continuation markers are attached here.
  std::vector<std::string> segment(std::string_view word) const;

 private:
  std::vector<Merge> merges_;
  std::map<Merge, std::size_t> rank_;
};

// Merge file: one "left right" pair per line, highest priority first.
// Blank lines and lines starting with '#' are skipped.
BpeModel read_bpe_merges(std::istream& in);
void write_bpe_merges(std::ostream& out, const BpeModel& bpe);
BpeModel load_bpe_merges(const std::filesystem::path& path);
void save_bpe_merges(const std::filesystem::path& path, const BpeModel& bpe);

// Splits UTF-8 text into code points; throws FormatError on malformed input.
std::vector<std::string> split_code_points(std::string_view text);

// <s>, </s>, the space token, then each code point of `alphabet`.
Vocabulary make_char_vocabulary(std::string_view alphabet);
// <s>, </s>, then every symbol reachable from `alphabet` through `bpe`, each
// both bare (word-final) and with the continuation suffix.
Vocabulary make_bpe_vocabulary(std::string_view alphabet, const BpeModel& bpe);

// Char mode: one token per code point, spaces included. BPE mode: words are
// the space-separated runs of the text, segmented and suffixed. Throws
// ArgumentError on empty text and UnknownTokenError on an uncovered symbol.
std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab,
                              const BpeModel& bpe = {});

// Specials are dropped. BPE output joins words with single spaces.
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

struct TimedToken {
  TokenId id = 0;
  std::size_t step = 0;
};

struct WordCompletion {
  std::string word;
  std::size_t step = 0;
  bool operator==(const WordCompletion&) const = default;
};

// Which step a character-level word is charged to.
enum class CharWordCommit {
  kAtSeparator,  // the step emitting the following space, </s>, or stream end
  kAtLastChar,   // the step emitting the word's own last character
};

// Words in emission order with the step at which each became complete.
// Tokens after </s> are ignored.
std::vector<WordCompletion> word_boundaries(std::span<const TimedToken> tokens,
                                            const Vocabulary& vocab,
                                            CharWordCommit mode = CharWordCommit::kAtSeparator);

std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(std::string_view json);
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace simulst
