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

#include <algorithm>
#include <fstream>
#include <random>

#include "json.hpp"
#include "simulst/engine.h"
#include "simulst/error.h"
#include "test_util.h"

namespace simulst {
namespace {

using testing::char_vocab;
using testing::ScriptedModel;
using testing::segment_features;
using testing::toy_model;

struct LoopResult {
  std::vector<TokenId> tokens;
  std::vector<std::array<std::size_t, 3>> steps;  // t, g, w
};

// The online loop written out directly against encode/decode_step.
LoopResult straight_line(const ToyModel& m, const AudioFeatures& x, std::size_t k, std::size_t s,
                         std::size_t n, std::size_t limit) {
  const Vocabulary& v = m.vocabulary();
  const std::size_t len = x.num_frames();
  LoopResult r;
  DecoderState z = m.init_decoder_state();
  TokenId y = v.bos();
  for (std::size_t t = 1;; ++t) {
    const std::size_t g = std::min(k + (t - 1) * s, len);
    const EncoderStates enc = m.encode(x.prefix(g));
    std::size_t w = 0;
    bool eos = false;
    while (w < n && r.tokens.size() < limit) {
      DecodeOutput out = m.decode_step(enc, z, y);
      TokenId best = 0;
      for (std::size_t i = 1; i < out.scores.size(); ++i) {
        if (out.scores[i] > out.scores[best]) best = static_cast<TokenId>(i);
      }
      if (best == v.eos()) {
        eos = true;
        break;
      }
      r.tokens.push_back(best);
      y = best;
      z = std::move(out.state);
      ++w;
    }
    r.steps.push_back({t, g, w});
    if ((eos && g == len) || r.tokens.size() >= limit) break;
  }
  return r;
}

std::vector<std::array<std::size_t, 3>> steps_of(const DecodingTrace& trace) {
  std::vector<std::array<std::size_t, 3>> out;
  for (const auto& s : trace.steps) out.push_back({s.t, s.frames_read, s.emitted});
  return out;
}

TEST(MaxOutputLength, Threshold) {
  EXPECT_EQ(max_output_length(40, 0.25), 2u);
  EXPECT_EQ(max_output_length(40, 1.0), 10u);
  EXPECT_EQ(max_output_length(41, 1.0), 11u);
  EXPECT_EQ(max_output_length(10, 0.7), 2u);
  EXPECT_EQ(max_output_length(40, 0.7), 7u);
  EXPECT_EQ(max_output_length(1, 0.5), 0u);
}

TEST(OnlineDecode, Seed42Fixture) {
  std::ifstream in(testing::data_dir() / "seed42.json");
  ASSERT_TRUE(in);
  const auto fx = nlohmann::json::parse(in);
  const Vocabulary vocab = make_char_vocabulary(fx["alphabet"].get<std::string>());
  const ToyModel model(generate_toy_model(fx["seed"].get<std::uint64_t>(), {}, vocab));
  const AudioFeatures x(fx["features"].get<std::vector<float>>(), fx["frames"], fx["dim"]);
  const auto& on = fx["online"];

  EXPECT_EQ(offline_greedy(model, x, 1.0).token_ids, fx["offline"].get<std::vector<TokenId>>());

  const OnlineResult r = online_decode(model, x, {{on["k"], on["s"], on["N"]}, 1.0});
  EXPECT_EQ(r.hypothesis.token_ids, on["tokens"].get<std::vector<TokenId>>());
  EXPECT_EQ(r.hypothesis.emitted_at_step, on["emitted_at"].get<std::vector<std::size_t>>());
  EXPECT_EQ(steps_of(r.trace), (on["steps"].get<std::vector<std::array<std::size_t, 3>>>()));
  EXPECT_EQ(stop_reason_name(r.stop_reason), on["stop_reason"].get<std::string>());

  const LoopResult ref = straight_line(model, x, on["k"], on["s"], on["N"], 10);
  EXPECT_EQ(ref.tokens, r.hypothesis.token_ids);
  EXPECT_EQ(ref.steps, steps_of(r.trace));
}

TEST(OnlineDecode, MatchesStraightLineLoop) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> len(8, 90), k(1, 40), s(1, 12), n(1, 3);
  std::uniform_real_distribution<double> ratio(0.5, 3.0);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const ToyModel model = toy_model(seed);
    const AudioFeatures x = segment_features(rng, len(rng));
    const EngineConfig cfg{{k(rng), s(rng), n(rng)}, ratio(rng)};
    const OnlineResult r = online_decode(model, x, cfg);
    const LoopResult ref = straight_line(model, x, cfg.policy.k, cfg.policy.s, cfg.policy.n,
                                         max_output_length(x.num_frames(), cfg.max_length_ratio));
    ASSERT_EQ(r.hypothesis.token_ids, ref.tokens) << "seed " << seed;
    ASSERT_EQ(steps_of(r.trace), ref.steps) << "seed " << seed;
  }
}

TEST(OnlineDecode, FullWaitEqualsOffline) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<std::size_t> len(4, 120), extra(0, 50), s(1, 30), n(1, 3);
  for (std::uint64_t seed = 100; seed < 220; ++seed) {
    const ToyModel model = toy_model(seed);
    const AudioFeatures x = segment_features(rng, len(rng));
    const EngineConfig cfg{{x.num_frames() + extra(rng), s(rng), n(rng)}, 1.5};
    const OnlineResult r = online_decode(model, x, cfg);
    const Hypothesis off = offline_greedy(model, x, cfg.max_length_ratio);
    ASSERT_EQ(r.hypothesis.token_ids, off.token_ids) << "seed " << seed;
    for (const auto& step : r.trace.steps) ASSERT_EQ(step.frames_read, x.num_frames());
  }
}

TEST(OnlineDecode, TracesValidateAndRunsAreDeterministic) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> len(8, 90), k(1, 60), s(1, 12), n(1, 3);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const ToyModel model = toy_model(seed);
    const AudioFeatures x = segment_features(rng, len(rng));
    const EngineConfig cfg{{k(rng), s(rng), n(rng)}, 1.0};
    const OnlineResult a = online_decode(model, x, cfg);
    const OnlineResult b = online_decode(model, x, cfg);
    ASSERT_EQ(a.hypothesis, b.hypothesis);
    ASSERT_EQ(a.trace, b.trace);
    const auto v = validate_trace(a.trace, cfg.policy, a.hypothesis.size());
    ASSERT_TRUE(v.empty()) << v.front();
    // Saturated steps, other than the last, write the full N tokens.
    for (std::size_t i = 0; i + 1 < a.trace.steps.size(); ++i) {
      if (a.trace.steps[i].frames_read == x.num_frames()) {
        ASSERT_EQ(a.trace.steps[i].emitted, cfg.policy.n);
      }
    }
  }
}

const Vocabulary kAb = make_char_vocabulary("ab");

AudioFeatures zeros(std::size_t frames) {
  return AudioFeatures(std::vector<float>(frames * 2, 0.0f), frames, 2);
}

TEST(OnlineDecode, EarlyEosIsDiscarded) {
  const TokenId a = kAb.id("a");
  const ScriptedModel model(kAb, 2, [&](std::size_t frames, std::size_t committed) {
    if (frames == 4) return kAb.eos();
    return committed < 3 ? a : kAb.eos();
  });
  const OnlineResult r = online_decode(model, zeros(10), {{4, 2, 2}, 4.0});
  EXPECT_EQ(r.hypothesis.token_ids, (std::vector<TokenId>{a, a, a}));
  EXPECT_EQ(r.hypothesis.emitted_at_step, (std::vector<std::size_t>{2, 2, 3}));
  EXPECT_EQ(steps_of(r.trace), (std::vector<std::array<std::size_t, 3>>{
                                   {1, 4, 0}, {2, 6, 2}, {3, 8, 1}, {4, 10, 0}}));
  EXPECT_EQ(r.stop_reason, StopReason::kEosAfterFullRead);
  // The discarded </s> is rolled back and step 2 still conditions on <s>.
  const std::vector<std::string> expected = {
      "read 4", "decode 0", "commit 0", "rollback",
      "read 6", "decode 0", "decode 3", "commit 2",
      "read 8", "decode 3", "decode 3", "commit 1", "rollback",
      "read 10", "decode 3", "commit 0", "rollback", "end"};
  EXPECT_EQ(model.log, expected);
}

TEST(OnlineDecode, SaturatedScheduleDoesNotReread) {
  const ScriptedModel model(kAb, 2, [&](std::size_t, std::size_t c) {
    return c < 9 ? kAb.id("b") : kAb.eos();
  });
  const OnlineResult r = online_decode(model, zeros(12), {{4, 4, 2}, 4.0});
  EXPECT_EQ(r.hypothesis.size(), 9u);
  EXPECT_EQ(std::count_if(model.log.begin(), model.log.end(),
                          [](const std::string& l) { return l.starts_with("read"); }),
            3);
  EXPECT_EQ(r.trace.steps.back().emitted, 1u);
}

TEST(OnlineDecode, MaxLengthStop) {
  const ScriptedModel model(kAb, 2, [&](std::size_t, std::size_t) { return kAb.id("a"); });
  const OnlineResult r = online_decode(model, zeros(40), {{4, 4, 3}, 0.25});
  EXPECT_EQ(r.hypothesis.size(), 2u);
  EXPECT_EQ(r.stop_reason, StopReason::kMaxLength);
  EXPECT_EQ(offline_greedy(model, zeros(40), 0.25).size(), 2u);
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AudioFeatures x = segment_features(rng, 40);
    EXPECT_LE(offline_greedy(toy_model(seed), x, 0.25).size(), 2u);
    EXPECT_LE(online_decode(toy_model(seed), x, {{8, 4, 2}, 0.25}).hypothesis.size(), 2u);
  }
}

TEST(OnlineDecode, AlwaysEosGivesEmptyOutput) {
  const ScriptedModel model(kAb, 2, [&](std::size_t, std::size_t) { return kAb.eos(); });
  EXPECT_TRUE(offline_greedy(model, zeros(16), 1.0).empty());
  const OnlineResult r = online_decode(model, zeros(16), {{4, 8, 2}, 1.0});
  EXPECT_TRUE(r.hypothesis.empty());
  EXPECT_EQ(r.trace.steps.size(), 3u);
  EXPECT_EQ(r.trace.total_emitted(), 0u);
  EXPECT_EQ(r.stop_reason, StopReason::kEosAfterFullRead);
}

TEST(OnlineDecode, SessionFailureKeepsPartialResult) {
  const ScriptedModel model(kAb, 2, [&](std::size_t frames, std::size_t c) -> TokenId {
    if (frames >= 8 && c >= 3) throw SessionError("link down");
    return kAb.id("a");
  });
  try {
    online_decode(model, zeros(20), {{4, 4, 2}, 4.0});
    FAIL() << "expected DecodingAborted";
  } catch (const DecodingAborted& e) {
    EXPECT_EQ(std::string(e.what()), "link down");
    const OnlineResult& p = e.partial();
    EXPECT_EQ(p.hypothesis.size(), 2u);
    EXPECT_EQ(p.trace.steps.size(), 1u);
    EXPECT_TRUE(validate_trace(p.trace, {4, 4, 2}, p.hypothesis.size()).empty());
  }
}

TEST(OnlineDecode, RejectsBadInputs) {
  const ToyModel model = toy_model(1);
  EXPECT_THROW(online_decode(model, zeros(8), {{1, 1, 1}, 1.0}), ConfigError);
  std::mt19937_64 rng(1);
  const AudioFeatures x = segment_features(rng, 8);
  EXPECT_THROW(online_decode(model, x, {{0, 1, 1}, 1.0}), ArgumentError);
  EXPECT_THROW(offline_greedy(model, x, 0.0), ArgumentError);
}

TEST(StopReason, Names) {
  EXPECT_EQ(parse_stop_reason("max_length"), StopReason::kMaxLength);
  EXPECT_EQ(parse_stop_reason(stop_reason_name(StopReason::kEosAfterFullRead)),
            StopReason::kEosAfterFullRead);
  EXPECT_THROW(parse_stop_reason("done"), FormatError);
}

}  // namespace
}  // namespace simulst
