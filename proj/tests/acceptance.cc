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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"
#include "oracles.h"
#include "simulst/bleu.h"
#include "simulst/bridge.h"
#include "simulst/engine.h"
#include "simulst/harness.h"
#include "simulst/latency.h"
#include "simulst/policy.h"
#include "test_util.h"

namespace simulst {
namespace {

namespace fs = std::filesystem;
using testing::segment_features;
using testing::toy_model;

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

DecodingTrace random_trace(std::mt19937_64& rng, PolicyConfig& p, bool unit) {
  std::uniform_int_distribution<std::size_t> dk(1, 250), ds(1, 30), dn(1, 3), dx(1, 400),
      extra(0, 4);
  p = {dk(rng), ds(rng), dn(rng)};
  const std::size_t x = dx(rng);
  const Schedule sched(p, x);
  const std::size_t steps = sched.cutoff_step() + extra(rng);
  std::uniform_int_distribution<std::size_t> dw(0, p.n);
  DecodingTrace trace;
  trace.src_len = x;
  for (std::size_t t = 1; t <= steps; ++t) {
    trace.steps.push_back({t, sched.frames_at_step(t), unit ? 1 : dw(rng)});
  }
  if (trace.total_emitted() == 0) trace.steps.back().emitted = 1;
  return trace;
}

bool close(long double got, long double want, long double tol) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1.0L) <= tol;
}

// 1. k >= |X| reproduces offline greedy decoding exactly.
std::string offline_equivalence() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> len(8, 160), extra(0, 100), s(1, 30), n(1, 3);
  std::size_t non_empty = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ToyModel model = toy_model(5000 + seed);
    const AudioFeatures x = segment_features(rng, len(rng));
    const EngineConfig cfg{{x.num_frames() + extra(rng), s(rng), n(rng)}, 1.0};
    const OnlineResult on = online_decode(model, x, cfg);
    const Hypothesis off = offline_greedy(model, x, cfg.max_length_ratio);
    require(on.hypothesis.token_ids == off.token_ids, "model seed " + std::to_string(5000 + seed));
    for (const auto& st : on.trace.steps) require(st.frames_read == x.num_frames(), "g(t) != |X|");
    non_empty += !off.empty();
  }
  return "100/100 models identical, " + std::to_string(non_empty) + " with non-empty output";
}

// 2. Lagging metrics agree with direct summation.
std::string metric_oracles() {
  {
    DecodingTrace a{{}, 10, 10.0};
    const Schedule s({4, 2, 1}, 10);
    for (std::size_t t = 1; t <= 5; ++t) a.steps.push_back({t, s.frames_at_step(t), 1});
    require(al_original(a, 5).frames == 4.0, "k=4,s=2,|X|=10,|Y|=5 is not exactly 4");
    DecodingTrace b{{}, 10, 10.0};
    for (std::size_t t = 1; t <= 4; ++t) b.steps.push_back({t, s.frames_at_step(t), 2});
    require(al_weighted(b, 8).frames == 10.25, "w_t=2 case is not exactly 10.25");
  }
  std::mt19937_64 rng(1002);
  long double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    PolicyConfig p;
    const DecodingTrace tr = random_trace(rng, p, false);
    std::vector<std::size_t> g, w;
    for (const auto& st : tr.steps) {
      g.push_back(st.frames_read);
      w.push_back(st.emitted);
    }
    const std::size_t y = tr.total_emitted();
    const long double o5 = oracle::token_al(g, w, tr.src_len, y, false);
    const long double o6 = oracle::token_al(g, w, tr.src_len, y, true);
    require(close(al_original(tr, y).frames, o5, 1e-9L), "al_original, trace " + std::to_string(i));
    require(close(al_weighted(tr, y).frames, o6, 1e-9L), "al_weighted, trace " + std::to_string(i));
    worst = std::max({worst, std::fabs(al_original(tr, y).frames - o5),
                      std::fabs(al_weighted(tr, y).frames - o6)});

    // One word per emitted token, charged at the emitting step.
    WordDelaySequence words;
    words.source_ms = static_cast<double>(tr.src_len) * tr.frame_ms;
    for (const auto& st : tr.steps) {
      for (std::size_t j = 0; j < st.emitted; ++j) {
        words.delays_ms.push_back(static_cast<double>(st.frames_read) * tr.frame_ms);
      }
    }
    const std::size_t ref = 1 + rng() % 40;
    const long double ow = oracle::word_al(words.delays_ms, words.source_ms, ref);
    require(close(al_word_adaptive(words, ref), ow, 1e-9L),
            "al_word_adaptive, trace " + std::to_string(i));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "1000 traces, max abs error %.3Lg; AL=4 and 10.25 exact", worst);
  return buf;
}

// 3. Unit weights reduce the weighted form to the original exactly.
std::string unit_weight_reduction() {
  std::mt19937_64 rng(1003);
  for (int i = 0; i < 1000; ++i) {
    PolicyConfig p;
    const DecodingTrace tr = random_trace(rng, p, true);
    const std::size_t y = tr.total_emitted();
    require(al_weighted(tr, y).frames == al_original(tr, y).frames, "trace " + std::to_string(i));
    require(al_weighted(tr, y).ms == al_original(tr, y).ms, "trace " + std::to_string(i) + " ms");
  }
  return "1000 unit-weight traces bit-identical";
}

struct Fixture {
  fs::path dir;
  Corpus corpus;
  std::unique_ptr<ToyModel> model;
};

Fixture& corpus20() {
  static Fixture f = [] {
    Fixture x;
    x.dir = testing::scratch_dir("acceptance");
    SyntheticOptions opt;
    opt.seed = 1;
    opt.utterances = 20;
    opt.min_frames = 120;
    opt.max_frames = 200;
    x.corpus = load_corpus(gen_synthetic(opt, x.dir));
    x.model = load_manifest_model(x.corpus.manifest);
    return x;
  }();
  return f;
}

const SweepGrid kGrid{{100, 200}, {10, 20}, {1, 2, 3}};

// 4. Full-wait decoding lags by exactly the source duration.
std::string offline_al_identity() {
  Fixture& f = corpus20();
  const Vocabulary& v = f.model->vocabulary();
  const auto records = decode_corpus(*f.model, f.corpus, std::nullopt, 1.0);
  std::size_t with_words = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Utterance& u = f.corpus.utterances[i];
    const auto& r = records[i].result;
    const auto words = word_delays(r.hypothesis, r.trace, v,
                                   r.stop_reason == StopReason::kEosAfterFullRead);
    require(!words.delays_ms.empty(), u.id + " has no words");
    ++with_words;
    const double al = al_word_adaptive(words, oracle::words(u.reference).size());
    require(al == u.features.duration_ms(), u.id + ": AL " + std::to_string(al));
    require(utterance_al_ms(records[i], v, u.reference, AlVariant::kAdaptive) == al, u.id);
  }
  // Full-wait online runs (k >= |X|) on random models as well.
  std::mt19937_64 rng(1004);
  const Vocabulary cv = testing::char_vocab();
  std::size_t random_words = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ToyModel model = toy_model(7000 + seed);
    const AudioFeatures x = segment_features(rng, 40 + rng() % 120);
    const OnlineResult r = online_decode(model, x, {{x.num_frames() + 5, 10, 2}, 1.0});
    const auto words =
        word_delays(r.hypothesis, r.trace, cv, r.stop_reason == StopReason::kEosAfterFullRead);
    if (words.delays_ms.empty()) continue;
    ++random_words;
    require(al_word_adaptive(words, 1 + seed % 7) == x.duration_ms(),
            "model seed " + std::to_string(7000 + seed));
  }
  return std::to_string(with_words) + " corpus utterances and " + std::to_string(random_words) +
         " random full-wait runs equal |X|*frame_ms";
}

// 5. The 12-configuration sweep plus offline row.
std::string table_protocol() {
  Fixture& f = corpus20();
  const Vocabulary& v = f.model->vocabulary();
  std::size_t max_len = 0;
  for (const auto& u : f.corpus.utterances) max_len = std::max(max_len, u.features.num_frames());
  const SweepResult r = run_sweep(*f.model, f.corpus, kGrid, {1.0, 4, true});
  require(r.rows.size() == 13, "expected 13 rows");
  require(!r.rows.back().policy.has_value(), "offline row is not last");
  require(r.rows.back().bleu == 100.0, "offline BLEU is not 100");
  for (std::size_t i = 1; i + 1 < r.rows.size(); ++i) {
    require(r.rows[i - 1].al_ms <= r.rows[i].al_ms, "rows not sorted by AL");
  }
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> al;
  std::size_t equivalent = 0;
  for (const auto& row : r.rows) {
    if (!row.policy) continue;
    al[{row.policy->k, row.policy->s, row.policy->n}] = row.al_ms;
    if (row.policy->k >= max_len) {
      require(row.bleu == 100.0, "offline-equivalent row BLEU " + std::to_string(row.bleu));
      ++equivalent;
    }
  }
  require(equivalent == 6, "expected 6 offline-equivalent rows");
  for (std::size_t s : kGrid.s) {
    for (std::size_t n : kGrid.n) {
      require(al.at({100, s, n}) <= al.at({200, s, n}), "AL decreases in k");
    }
  }
  // Recompute every row's mean AL with the direct-summation oracle.
  for (const auto& group : r.traces) {
    long double sum = 0;
    for (const auto& rec : group) {
      const Utterance& u = f.corpus.utterances[*f.corpus.manifest.find(rec.id)];
      const auto& res = rec.result;
      const auto words = word_delays(res.hypothesis, res.trace, v,
                                     res.stop_reason == StopReason::kEosAfterFullRead);
      require(!words.delays_ms.empty(), rec.id + " produced no words");
      sum += oracle::word_al(words.delays_ms, words.source_ms, oracle::words(u.reference).size());
      // The offline row is a single full-wait step writing everything.
      const PolicyConfig full{res.trace.src_len, 1, std::max<std::size_t>(res.hypothesis.size(), 1)};
      require(validate_trace(res.trace, rec.policy.value_or(full), res.hypothesis.size()).empty(),
              rec.id + " trace invalid");
    }
    const long double mean = sum / group.size();
    bool found = false;
    for (const auto& row : r.rows) {
      if (row.policy == group.front().policy) found = close(row.al_ms, mean, 1e-9L);
    }
    require(found, "row AL disagrees with oracle");
  }
  std::istringstream table(format_results_tsv(r.rows));
  std::string first;
  std::getline(table, first);
  std::getline(table, first);
  for (char& c : first) c = c == '\t' ? ' ' : c;
  return "13 rows sorted by AL, lowest " + first + ", offline BLEU 100.00";
}

// 6. Encoder subsampling and attention normalization.
std::string shape_checks() {
  const ToyModel model = toy_model(6006);
  std::mt19937_64 rng(1006);
  for (std::size_t t = 1; t <= 64; ++t) {
    require(model.encode(testing::random_features(rng, t)).num_states == (t + 3) / 4,
            "T=" + std::to_string(t));
  }
  double worst = 0;
  DecoderState z = model.init_decoder_state();
  TokenId y = model.vocabulary().bos();
  for (int i = 0; i < 100; ++i) {
    const EncoderStates enc = model.encode(segment_features(rng, 1 + rng() % 120));
    const DecodeOutput out = model.decode_step(enc, z, y);
    double sum = 0;
    for (float a : out.attention) sum += a;
    worst = std::max(worst, std::fabs(sum - 1.0));
    require(std::fabs(sum - 1.0) <= 1e-6, "state " + std::to_string(i));
    z = out.state;
    y = predict(out.scores).token;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "H=ceil(T/4) for T=1..64; 100 attention rows, max |sum-1| %.2g",
                worst);
  return buf;
}

// 7. Word-merge fixtures and tokenize/detokenize round trips.
std::string word_merges() {
  const Vocabulary cv = make_char_vocabulary("abc");
  const std::vector<TimedToken> ct = {
      {cv.id("a"), 1}, {cv.id("b"), 1}, {cv.id(" "), 2}, {cv.id("c"), 3}, {cv.eos(), 4}};
  require(word_boundaries(ct, cv) == std::vector<WordCompletion>{{"ab", 2}, {"c", 4}},
          "char fixture");
  const Vocabulary bv({"<s>", "</s>", "Hel@@", "lo", "wor@@", "ld"}, 0, 1, Granularity::kBpe);
  const std::vector<TimedToken> bt = {{2, 1}, {3, 2}, {4, 3}, {5, 4}};
  require(word_boundaries(bt, bv) == std::vector<WordCompletion>{{"Hello", 2}, {"world", 4}},
          "bpe fixture");
  require(word_boundaries(std::vector<TimedToken>{{cv.id("a"), 1}, {cv.id("b"), 2}, {cv.eos(), 3}},
                          cv) == std::vector<WordCompletion>{{"ab", 3}},
          "single word at eos");

  std::mt19937_64 rng(1007);
  const std::string alphabet = "etaoinshrd";
  const Vocabulary char_vocab = make_char_vocabulary(alphabet);
  const BpeModel bpe({{"t", "h"}, {"e", "r"}, {"th", "e"}, {"i", "n"}, {"a", "n"}, {"o", "n"}});
  const Vocabulary bpe_vocab = make_bpe_vocabulary(alphabet, bpe);
  std::uniform_int_distribution<std::size_t> len(1, 50), pick(0, alphabet.size() - 1);
  std::bernoulli_distribution space(0.2);
  for (int i = 0; i < 1000; ++i) {
    std::string any, single;
    for (std::size_t n = len(rng); any.size() < n;) any += space(rng) ? ' ' : alphabet[pick(rng)];
    for (std::size_t n = len(rng); single.size() < n;) {
      const bool sp = space(rng) && !single.empty() && single.back() != ' ';
      single += sp ? ' ' : alphabet[pick(rng)];
    }
    if (single.back() == ' ') single += 'e';
    require(detokenize(tokenize(any, char_vocab), char_vocab) == any, "char: '" + any + "'");
    require(detokenize(tokenize(single, bpe_vocab, bpe), bpe_vocab) == single,
            "bpe: '" + single + "'");
  }
  return "char and bpe fixtures exact; 1000 strings round-trip in both granularities";
}

// 8. Bridge loopback yields the same tables as in-process decoding.
std::string bridge_transparency() {
  Fixture& f = corpus20();
  BridgeServer server(*f.model, {"127.0.0.1", 0});
  server.start();
  const auto remote = remote_model(server.endpoint().to_string());
  const SweepResult local = run_sweep(*f.model, f.corpus, kGrid, {1.0, 4, true});
  const SweepResult wire = run_sweep(*remote, f.corpus, kGrid, {1.0, 4, true});
  require(format_results_tsv(local.rows) == format_results_tsv(wire.rows), "TSV tables differ");
  require(format_score_report(local.rows) == format_score_report(wire.rows), "reports differ");
  for (std::size_t i = 0; i < local.rows.size(); ++i) {
    require(local.rows[i].bleu == wire.rows[i].bleu && local.rows[i].al_ms == wire.rows[i].al_ms,
            "row values differ");
  }
  for (std::size_t c = 0; c < local.traces.size(); ++c) {
    for (std::size_t u = 0; u < local.traces[c].size(); ++u) {
      const auto& a = local.traces[c][u].result;
      const auto& b = wire.traces[c][u].result;
      require(a.hypothesis == b.hypothesis && a.trace == b.trace, "traces differ");
    }
  }
  server.stop();
  return "13-row table and all 260 traces bit-identical over TCP loopback";
}

// 9. BLEU sanity.
std::string bleu_sanity() {
  Fixture& f = corpus20();
  std::vector<std::string> refs;
  for (const auto& u : f.corpus.utterances) refs.push_back(u.reference);
  require(corpus_bleu(refs, refs) == 100.0, "identical corpus");
  const std::vector<std::string> plain = {"the cat sat on the mat", "a b c d"};
  require(corpus_bleu(plain, plain) == 100.0, "identical corpus");

  std::ifstream in(testing::data_dir() / "bleu_pairs.json");
  require(static_cast<bool>(in), "missing bleu_pairs.json");
  const auto fx = nlohmann::json::parse(in);
  const auto pairs = fx["pairs"].get<std::vector<std::pair<std::string, std::string>>>();
  const auto expected = fx["prefix_bleu"].get<std::vector<double>>();
  require(pairs.size() == 50, "fixture must hold 50 pairs");
  std::vector<std::string> h, r;
  double worst = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    h.push_back(pairs[i].first);
    r.push_back(pairs[i].second);
    const double got = corpus_bleu(h, r);
    worst = std::max({worst, std::fabs(got - expected[i]), std::fabs(got - oracle::bleu(h, r))});
    require(std::fabs(got - expected[i]) <= 1e-6, "pair prefix " + std::to_string(i + 1));
    require(std::fabs(got - oracle::bleu(h, r)) <= 1e-6, "oracle, prefix " + std::to_string(i + 1));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "identical corpora 100.00; 50 pairs max abs error %.2g", worst);
  return buf;
}

}  // namespace
}  // namespace simulst

int main() {
  using simulst::Failure;
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"offline equivalence", simulst::offline_equivalence},
      {"metric oracles", simulst::metric_oracles},
      {"weighted AL reduction", simulst::unit_weight_reduction},
      {"offline AL identity", simulst::offline_al_identity},
      {"table protocol", simulst::table_protocol},
      {"shape and normalization", simulst::shape_checks},
      {"word merges", simulst::word_merges},
      {"bridge transparency", simulst::bridge_transparency},
      {"BLEU sanity", simulst::bleu_sanity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string status = "PASS", detail;
    try {
      detail = criteria[i].second();
    } catch (const Failure& f) {
      status = "FAIL";
      detail = f.what;
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = std::string("exception: ") + e.what();
    }
    failed += status == "FAIL";
    std::printf("%s %zu %s: %s\n", status.c_str(), i + 1, criteria[i].first.c_str(),
                detail.c_str());
  }
  std::filesystem::remove_all(simulst::corpus20().dir);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
