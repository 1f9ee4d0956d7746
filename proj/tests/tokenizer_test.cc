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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "simulst/error.h"
#include "simulst/tokenizer.h"

namespace simulst {
namespace {

std::vector<TimedToken> timed(const Vocabulary& v, std::vector<std::pair<std::string, std::size_t>> t) {
  std::vector<TimedToken> out;
  for (const auto& [tok, step] : t) out.push_back({v.id(tok), step});
  return out;
}

TEST(Tokenize, CharSplitsEveryCodePoint) {
  const Vocabulary v = make_char_vocabulary("abc");
  const auto ids = tokenize("ab c", v);
  std::vector<std::string> pieces;
  for (TokenId id : ids) pieces.push_back(v.token(id));
  EXPECT_EQ(pieces, (std::vector<std::string>{"a", "b", " ", "c"}));
  EXPECT_EQ(detokenize(ids, v), "ab c");
  EXPECT_THROW(tokenize("abz", v), UnknownTokenError);
}

TEST(Tokenize, BpeSingleMerge) {
  const BpeModel bpe(std::vector<BpeModel::Merge>{{"l", "o"}});
  const Vocabulary v = make_bpe_vocabulary("lo", bpe);
  const auto ids = tokenize("lo", v, bpe);
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_EQ(v.token(ids[0]), "lo");
  const auto ids2 = tokenize("lol", v, bpe);
  ASSERT_EQ(ids2.size(), 2u);
  EXPECT_EQ(v.token(ids2[0]), "lo@@");
  EXPECT_EQ(v.token(ids2[1]), "l");
}

TEST(BpeModel, MergesApplyByRank) {
  const BpeModel bpe({{"a", "b"}, {"b", "c"}, {"ab", "c"}});
  EXPECT_EQ(bpe.segment("abc"), (std::vector<std::string>{"abc"}));
  EXPECT_EQ(bpe.segment("bcab"), (std::vector<std::string>{"bc", "ab"}));
  EXPECT_EQ(bpe.segment("abab"), (std::vector<std::string>{"ab", "ab"}));
  EXPECT_EQ(bpe.segment("x"), (std::vector<std::string>{"x"}));
}

TEST(BpeModel, MergesFileRoundTrip) {
  const BpeModel bpe({{"a", "b"}, {"ab", "c"}});
  std::stringstream io;
  write_bpe_merges(io, bpe);
  EXPECT_EQ(read_bpe_merges(io).merges(), bpe.merges());
  std::istringstream bad("a b c\n");
  EXPECT_THROW(read_bpe_merges(bad), FormatError);
  std::istringstream comments("# header\n\na b\r\n");
  EXPECT_EQ(read_bpe_merges(comments).merges().size(), 1u);
}

TEST(SplitCodePoints, Utf8) {
  EXPECT_EQ(split_code_points("a\xc3\xa9z"), (std::vector<std::string>{"a", "\xc3\xa9", "z"}));
  EXPECT_THROW(split_code_points("\xc3"), FormatError);
}

TEST(WordBoundaries, CharWordsCompleteAtSeparator) {
  const Vocabulary v = make_char_vocabulary("abc");
  const auto t = timed(v, {{"a", 1}, {"b", 1}, {" ", 2}, {"c", 3}, {"</s>", 4}});
  EXPECT_EQ(word_boundaries(t, v),
            (std::vector<WordCompletion>{{"ab", 2}, {"c", 4}}));
  EXPECT_EQ(word_boundaries(t, v, CharWordCommit::kAtLastChar),
            (std::vector<WordCompletion>{{"ab", 1}, {"c", 3}}));
}

TEST(WordBoundaries, BpeWordsCompleteAtFinalPiece) {
  const Vocabulary v({"<s>", "</s>", "Hel@@", "lo", "wor@@", "ld"}, 0, 1, Granularity::kBpe);
  const auto t = timed(v, {{"Hel@@", 1}, {"lo", 2}, {"wor@@", 3}, {"ld", 4}});
  EXPECT_EQ(word_boundaries(t, v), (std::vector<WordCompletion>{{"Hello", 2}, {"world", 4}}));
  std::vector<TokenId> ids;
  for (const auto& x : t) ids.push_back(x.id);
  EXPECT_EQ(detokenize(ids, v), "Hello world");
}

TEST(WordBoundaries, SingleWordEndsAtEos) {
  const Vocabulary v = make_char_vocabulary("abc");
  EXPECT_EQ(word_boundaries(timed(v, {{"a", 1}, {"b", 2}, {"</s>", 5}}), v),
            (std::vector<WordCompletion>{{"ab", 5}}));
  // Without </s> the trailing word completes with its last character.
  EXPECT_EQ(word_boundaries(timed(v, {{"a", 1}, {"b", 2}}), v),
            (std::vector<WordCompletion>{{"ab", 2}}));
  EXPECT_TRUE(word_boundaries(timed(v, {{" ", 1}, {"</s>", 2}}), v).empty());
}

std::string random_text(std::mt19937_64& rng, std::string_view alphabet, bool single_spaces) {
  std::uniform_int_distribution<std::size_t> len(1, 40), pick(0, alphabet.size() - 1);
  std::bernoulli_distribution space(0.2);
  std::string s;
  for (std::size_t n = len(rng); s.size() < n;) {
    if (space(rng) && (!single_spaces || (!s.empty() && s.back() != ' '))) {
      s += ' ';
    } else {
      s += alphabet[pick(rng)];
    }
  }
  if (single_spaces) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    if (s.empty()) s = "a";
  }
  return s;
}

bool consistent_with_words(const std::vector<TokenId>& ids, const Vocabulary& v) {
  std::vector<TimedToken> t;
  for (std::size_t i = 0; i < ids.size(); ++i) t.push_back({ids[i], i + 1});
  std::string joined;
  std::size_t last = 0;
  for (const auto& w : word_boundaries(t, v)) {
    if (w.step < last) return false;
    last = w.step;
    if (!joined.empty()) joined += ' ';
    joined += w.word;
  }
  std::istringstream in(detokenize(ids, v));
  std::string norm;
  for (std::string w; in >> w;) norm += (norm.empty() ? "" : " ") + w;
  return joined == norm;
}

TEST(Tokenize, RandomRoundTrip) {
  std::mt19937_64 rng(77);
  const Vocabulary cv = make_char_vocabulary("abcdef");
  const BpeModel bpe({{"a", "b"}, {"c", "d"}, {"ab", "cd"}, {"e", "e"}, {"f", "a"}});
  const Vocabulary bv = make_bpe_vocabulary("abcdef", bpe);
  for (int i = 0; i < 1000; ++i) {
    const std::string c = random_text(rng, "abcdef", false);
    const auto cids = tokenize(c, cv);
    ASSERT_EQ(detokenize(cids, cv), c);
    ASSERT_TRUE(consistent_with_words(cids, cv)) << c;
    const std::string b = random_text(rng, "abcdef", true);
    const auto bids = tokenize(b, bv, bpe);
    ASSERT_EQ(detokenize(bids, bv), b);
    ASSERT_TRUE(consistent_with_words(bids, bv)) << b;
  }
}

TEST(Vocabulary, JsonRoundTrip) {
  const BpeModel bpe(std::vector<BpeModel::Merge>{{"a", "b"}});
  const Vocabulary v = make_bpe_vocabulary("ab", bpe);
  EXPECT_EQ(vocabulary_from_json(vocabulary_to_json(v)), v);
  EXPECT_THROW(vocabulary_from_json("{\"tokens\": 3}"), FormatError);
  const Vocabulary c = make_char_vocabulary("xy");
  EXPECT_EQ(c.token(c.bos()), "<s>");
  EXPECT_EQ(c.token(c.eos()), "</s>");
  EXPECT_TRUE(c.find(" ").has_value());
}

}  // namespace
}  // namespace simulst
