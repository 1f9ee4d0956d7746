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

#include "simulst/harness.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "simulst/bleu.h"
#include "simulst/error.h"
#include "simulst/sstf.h"

namespace simulst {

namespace {

constexpr std::string_view kCharAlphabet = "etaoinshrd";

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) / 9007199254740992.0;
}

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

// Piecewise-stationary features: segments of 4-16 frames around a random
// mean, with small per-frame noise.
AudioFeatures synth_features(std::mt19937_64& rng, std::size_t frames, std::size_t dim,
                             double frame_ms) {
  std::vector<float> values(frames * dim);
  std::vector<double> mean(dim);
  std::size_t left = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    if (left == 0) {
      for (auto& m : mean) m = -1.0 + 2.0 * uniform01(rng);
      left = uniform_int(rng, 4, 16);
    }
    --left;
    for (std::size_t d = 0; d < dim; ++d) {
      values[t * dim + d] = static_cast<float>(mean[d] + 0.2 * (uniform01(rng) - 0.5));
    }
  }
  return AudioFeatures(std::move(values), frames, dim, frame_ms);
}

BpeModel synth_merges(std::mt19937_64& rng, std::string_view alphabet, std::size_t count) {
  std::vector<std::string> symbols = split_code_points(alphabet);
  std::vector<BpeModel::Merge> merges;
  std::set<std::string> seen(symbols.begin(), symbols.end());
  while (merges.size() < count) {
    const auto& a = symbols[rng() % symbols.size()];
    const auto& b = symbols[rng() % symbols.size()];
    if (a.size() + b.size() > 4 || !seen.insert(a + b).second) continue;
    merges.emplace_back(a, b);
    symbols.push_back(a + b);
  }
  return BpeModel(std::move(merges));
}

std::size_t word_count(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  std::string w;
  while (in >> w) ++n;
  return n;
}

constexpr std::uint64_t kMaxModelAttempts = 1000;

constexpr std::size_t kMinWordTypes = 5;

// Every reference has a word, at least three quarters are distinct, one has
// four or more words so that every BLEU order is defined, and the corpus
// uses at least kMinWordTypes different words.
bool accept_references(const std::vector<std::string>& refs) {
  std::set<std::string> distinct;
  std::set<std::string> types;
  std::size_t longest = 0;
  for (const auto& r : refs) {
    std::istringstream in(r);
    std::size_t words = 0;
    for (std::string w; in >> w; ++words) types.insert(w);
    if (words == 0) return false;
    longest = std::max(longest, words);
    distinct.insert(r);
  }
  return longest >= 4 && 4 * distinct.size() >= 3 * refs.size() && types.size() >= kMinWordTypes;
}

std::string config_key(const std::optional<PolicyConfig>& p) {
  if (!p) return "offline";
  return std::to_string(p->k) + "/" + std::to_string(p->s) + "/" + std::to_string(p->n);
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& manifest_path) {
  Corpus corpus;
  corpus.manifest = load_manifest(manifest_path);
  for (const auto& entry : corpus.manifest.utterances) {
    AudioFeatures features = load_features(entry.features);
    if (features.frame_ms() != corpus.manifest.frame_ms) {
      throw FormatError("utterance " + entry.id + ": frame_ms differs from the manifest");
    }
    corpus.utterances.push_back({entry.id, std::move(features), entry.reference});
  }
  return corpus;
}

std::unique_ptr<ToyModel> load_manifest_model(const Manifest& manifest) {
  if (manifest.model.empty() || manifest.vocab.empty()) {
    throw ConfigError("manifest names no model/vocabulary");
  }
  Vocabulary vocab = load_vocabulary(manifest.vocab);
  return std::make_unique<ToyModel>(load_toy_model(manifest.model, vocab));
}

std::filesystem::path gen_synthetic(const SyntheticOptions& opt,
                                    const std::filesystem::path& out_dir) {
  if (opt.utterances < 1) throw ArgumentError("gen: need at least one utterance");
  if (opt.min_frames < 1 || opt.min_frames > opt.max_frames) {
    throw ArgumentError("gen: invalid frame range");
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "feats");

  std::mt19937_64 rng(opt.seed);
  Manifest manifest;
  manifest.frame_ms = opt.frame_ms;
  manifest.max_length_ratio = opt.max_length_ratio;
  manifest.model = "model.sstm";
  manifest.vocab = "vocab.json";

  std::optional<Vocabulary> vocab;
  if (opt.granularity == Granularity::kChar) {
    vocab = make_char_vocabulary(kCharAlphabet);
  } else {
    const BpeModel bpe = synth_merges(rng, kCharAlphabet, 16);
    vocab = make_bpe_vocabulary(kCharAlphabet, bpe);
    manifest.merges = "merges.txt";
    save_bpe_merges(out_dir / manifest.merges, bpe);
  }
  std::vector<AudioFeatures> features;
  for (std::size_t i = 0; i < opt.utterances; ++i) {
    const std::size_t frames = uniform_int(rng, opt.min_frames, opt.max_frames);
    features.push_back(synth_features(rng, frames, opt.dims.feature_dim, opt.frame_ms));
  }

  // Untrained weights often ignore the source or never emit a word boundary.
  // Walk the seeds upward from opt.seed until the offline outputs pass
  // accept_references; the chosen seed is stored in the weights.
  std::optional<ToyModelWeights> weights;
  std::vector<std::string> references;
  for (std::uint64_t attempt = 0; attempt < kMaxModelAttempts; ++attempt) {
    ToyModelWeights candidate = generate_toy_model(opt.seed + attempt, opt.dims, *vocab);
    const ToyModel model(candidate);
    references.clear();
    for (const auto& f : features) {
      references.push_back(detokenize(offline_greedy(model, f, opt.max_length_ratio).token_ids, *vocab));
    }
    if (accept_references(references)) {
      weights = std::move(candidate);
      break;
    }
  }
  if (!weights) {
    throw Error("gen: no usable toy model within " + std::to_string(kMaxModelAttempts) +
                " seeds of " + std::to_string(opt.seed));
  }
  save_toy_model(out_dir / manifest.model, *weights);
  save_vocabulary(out_dir / manifest.vocab, *vocab);

  char id[32];
  for (std::size_t i = 0; i < opt.utterances; ++i) {
    std::snprintf(id, sizeof(id), "utt%04zu", i);
    const fs::path rel = fs::path("feats") / (std::string(id) + ".sstf");
    save_features(out_dir / rel, features[i]);
    manifest.utterances.push_back({id, rel, references[i]});
  }
  const fs::path manifest_path = out_dir / "manifest.jsonl";
  save_manifest(manifest_path, manifest);
  return manifest_path;
}

std::vector<PolicyConfig> SweepGrid::configs() const {
  if (k.empty() || s.empty() || n.empty()) throw ArgumentError("sweep grid: empty value list");
  std::vector<PolicyConfig> out;
  for (auto kv : k) {
    for (auto sv : s) {
      for (auto nv : n) {
        PolicyConfig p{kv, sv, nv};
        p.validate();
        out.push_back(p);
      }
    }
  }
  return out;
}

std::vector<TraceRecord> decode_corpus(const Model& model, const Corpus& corpus,
                                       const std::optional<PolicyConfig>& policy,
                                       double max_length_ratio, std::size_t jobs) {
  const std::size_t count = corpus.utterances.size();
  std::vector<TraceRecord> records(count);
  std::vector<std::exception_ptr> errors(count);

  auto decode_one = [&](std::size_t i) {
    const Utterance& u = corpus.utterances[i];
    TraceRecord& rec = records[i];
    rec.id = u.id;
    rec.policy = policy;
    if (policy) {
      rec.result = online_decode(model, u.features, EngineConfig{*policy, max_length_ratio}, u.id);
    } else {
      Hypothesis hyp = offline_greedy(model, u.features, max_length_ratio, u.id);
      const std::size_t limit = max_output_length(u.features.num_frames(), max_length_ratio);
      rec.result.stop_reason =
          hyp.size() < limit ? StopReason::kEosAfterFullRead : StopReason::kMaxLength;
      rec.result.trace = full_wait_trace(u.features.num_frames(), u.features.frame_ms(), hyp.size());
      rec.result.hypothesis = std::move(hyp);
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        decode_one(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw Error("utterance " + corpus.utterances[i].id + " (" + config_key(policy) +
                  "): " + e.what());
    }
  }
  return records;
}

double utterance_al_ms(const TraceRecord& record, const Vocabulary& vocab,
                       std::string_view reference, AlVariant variant, CharWordCommit mode) {
  const OnlineResult& r = record.result;
  if (r.trace.steps.empty()) throw MetricError("utterance " + record.id + ": empty trace");
  if (r.hypothesis.empty()) {
    return static_cast<double>(r.trace.steps.back().frames_read) * r.trace.frame_ms;
  }
  switch (variant) {
    case AlVariant::kToken:
      return al_original(r.trace, r.hypothesis.size()).ms;
    case AlVariant::kTokenWeighted:
      return al_weighted(r.trace, r.hypothesis.size()).ms;
    case AlVariant::kAdaptive:
    case AlVariant::kOriginal: break;
  }
  const bool eos = r.stop_reason == StopReason::kEosAfterFullRead;
  const WordDelaySequence words = word_delays(r.hypothesis, r.trace, vocab, eos, mode);
  if (words.delays_ms.empty()) {
    return static_cast<double>(r.trace.steps.back().frames_read) * r.trace.frame_ms;
  }
  if (variant == AlVariant::kOriginal) return al_word_original(words);
  return al_word_adaptive(words, word_count(reference));
}

ResultRow score_records(const std::vector<TraceRecord>& records, const Corpus& corpus,
                        const Vocabulary& vocab, AlVariant variant, CharWordCommit mode) {
  if (records.empty()) throw ArgumentError("score: no records");
  std::vector<std::string> hyps, refs;
  double al_sum = 0.0;
  for (const auto& rec : records) {
    const auto index = corpus.manifest.find(rec.id);
    if (!index) throw FormatError("trace references unknown utterance id '" + rec.id + "'");
    const Utterance& u = corpus.utterances[*index];
    if (rec.result.trace.src_len != u.features.num_frames()) {
      throw FormatError("trace for '" + rec.id + "' has a different source length");
    }
    hyps.push_back(detokenize(rec.result.hypothesis.token_ids, vocab));
    refs.push_back(u.reference);
    try {
      al_sum += utterance_al_ms(rec, vocab, u.reference, variant, mode);
    } catch (const Error& e) {
      throw Error("utterance " + rec.id + ": " + e.what());
    }
  }
  ResultRow row;
  row.policy = records.front().policy;
  row.bleu = corpus_bleu(hyps, refs);
  row.al_ms = al_sum / static_cast<double>(records.size());
  row.al_variant = variant;
  return row;
}

SweepResult run_sweep(const Model& model, const Corpus& corpus, const SweepGrid& grid,
                      const SweepOptions& options) {
  if (corpus.utterances.empty()) throw ArgumentError("sweep: empty corpus");
  std::vector<std::optional<PolicyConfig>> configs;
  for (const auto& p : grid.configs()) configs.emplace_back(p);
  if (options.include_offline) configs.emplace_back(std::nullopt);

  std::vector<std::pair<ResultRow, std::vector<TraceRecord>>> scored;
  for (const auto& config : configs) {
    auto records = decode_corpus(model, corpus, config, options.max_length_ratio, options.jobs);
    ResultRow row = score_records(records, corpus, model.vocabulary(), grid.al_variant,
                                  grid.char_commit);
    scored.emplace_back(row, std::move(records));
  }
  std::vector<ResultRow> rows;
  for (const auto& s : scored) rows.push_back(s.first);
  sort_rows(rows);

  SweepResult result;
  for (const auto& row : rows) {
    auto it = std::find_if(scored.begin(), scored.end(),
                           [&](const auto& s) { return s.first.policy == row.policy; });
    result.rows.push_back(row);
    result.traces.push_back(std::move(it->second));
  }
  return result;
}

std::vector<ResultRow> score_traces(const std::vector<TraceRecord>& records, const Corpus& corpus,
                                    const Vocabulary& vocab, AlVariant variant,
                                    CharWordCommit mode) {
  std::map<std::string, std::vector<TraceRecord>> groups;
  for (const auto& rec : records) {
    if (!corpus.manifest.find(rec.id)) {
      throw FormatError("trace references unknown utterance id '" + rec.id + "'");
    }
    groups[config_key(rec.policy)].push_back(rec);
  }
  std::vector<ResultRow> rows;
  for (auto& [key, group] : groups) {
    // Corpus order, so sums accumulate exactly as in a sweep.
    std::stable_sort(group.begin(), group.end(), [&](const auto& a, const auto& b) {
      return *corpus.manifest.find(a.id) < *corpus.manifest.find(b.id);
    });
    rows.push_back(score_records(group, corpus, vocab, variant, mode));
  }
  sort_rows(rows);
  return rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.policy.has_value() != b.policy.has_value()) return a.policy.has_value();
    if (!a.policy) return false;
    if (a.al_ms != b.al_ms) return a.al_ms < b.al_ms;
    const auto& p = *a.policy;
    const auto& q = *b.policy;
    return std::tie(p.k, p.s, p.n) < std::tie(q.k, q.s, q.n);
  });
}

std::string format_results_tsv(const std::vector<ResultRow>& rows) {
  std::string out = "k\ts\tN\tbleu\tal_ms\n";
  for (const auto& row : rows) {
    if (row.policy) {
      out += std::to_string(row.policy->k) + '\t' + std::to_string(row.policy->s) + '\t' +
             std::to_string(row.policy->n);
    } else {
      out += "offline\t-\t-";
    }
    out += '\t' + format_double(row.bleu, 2) + '\t' + format_double(row.al_ms, 2) + '\n';
  }
  return out;
}

std::string format_plot_data(const std::vector<ResultRow>& rows) {
  std::string out = "AL BLEU\n";
  std::string offline;
  for (const auto& row : rows) {
    const std::string point = format_double(row.al_ms, 2) + ' ' + format_double(row.bleu, 2);
    if (row.policy) {
      out += point + '\n';
    } else {
      offline = "# offline " + point + '\n';
    }
  }
  return out + offline;
}

std::string format_score_report(const std::vector<ResultRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    nlohmann::json j;
    if (row.policy) {
      j["k"] = row.policy->k;
      j["s"] = row.policy->s;
      j["N"] = row.policy->n;
    } else {
      j["k"] = "offline";
      j["s"] = nullptr;
      j["N"] = nullptr;
    }
    j["bleu"] = row.bleu;
    j["al_ms"] = row.al_ms;
    j["al_variant"] = std::string(al_variant_name(row.al_variant));
    out += j.dump() + '\n';
  }
  return out;
}

std::string trace_file_name(const std::optional<PolicyConfig>& policy) {
  if (!policy) return "offline.jsonl";
  return "k" + std::to_string(policy->k) + "_s" + std::to_string(policy->s) + "_N" +
         std::to_string(policy->n) + ".jsonl";
}

}  // namespace simulst
