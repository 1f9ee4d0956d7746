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

// Evaluation harness: synthetic corpora, (k, s, N) sweeps, and rescoring of
// stored traces. Corpus AL is the unweighted mean of per-utterance AL.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simulst/engine.h"
#include "simulst/latency.h"
#include "simulst/model.h"
#include "simulst/records.h"
#include "simulst/tokenizer.h"
#include "simulst/toy_model.h"

namespace simulst {

struct Utterance {
  std::string id;
  AudioFeatures features;
  std::string reference;
};

// A manifest with every feature file loaded.
struct Corpus {
  Manifest manifest;
  std::vector<Utterance> utterances;
};

Corpus load_corpus(const std::filesystem::path& manifest_path);

// The manifest's toy model (weights, vocabulary, merges).
std::unique_ptr<ToyModel> load_manifest_model(const Manifest& manifest);

struct SyntheticOptions {
  std::uint64_t seed = 1;
  std::size_t utterances = 20;
  std::size_t min_frames = 40;
  std::size_t max_frames = 80;
  Granularity granularity = Granularity::kChar;
  ToyDims dims;
  double max_length_ratio = 1.0;
  double frame_ms = AudioFeatures::kDefaultFrameMs;
};

// Writes model.sstm, vocab.json, (merges.txt,) feats/<id>.sstf and
// manifest.jsonl under `out_dir`, and returns the manifest path. References
// are the detokenized offline greedy outputs of the generated model.
std::filesystem::path gen_synthetic(const SyntheticOptions& options,
                                    const std::filesystem::path& out_dir);

struct SweepGrid {
  std::vector<std::size_t> k;
  std::vector<std::size_t> s;
  std::vector<std::size_t> n;
  AlVariant al_variant = AlVariant::kAdaptive;
  CharWordCommit char_commit = CharWordCommit::kAtSeparator;

  std::vector<PolicyConfig> configs() const;  // k-major order
};

struct ResultRow {
  std::optional<PolicyConfig> policy;  // nullopt: the offline row
  double bleu = 0.0;
  double al_ms = 0.0;
  AlVariant al_variant = AlVariant::kAdaptive;
};

struct SweepOptions {
  double max_length_ratio = 1.0;
  std::size_t jobs = 1;
  bool include_offline = true;
};

struct SweepResult {
  std::vector<ResultRow> rows;  // online rows by AL, then offline
  // One entry per row, in `rows` order.
  std::vector<std::vector<TraceRecord>> traces;
};

// Decodes every utterance under `policy` (offline when nullopt). Results are
// in corpus order whatever `jobs` is. A failure rethrows naming the utterance.
std::vector<TraceRecord> decode_corpus(const Model& model, const Corpus& corpus,
                                       const std::optional<PolicyConfig>& policy,
                                       double max_length_ratio, std::size_t jobs = 1);

// Per-utterance AL in ms. An empty hypothesis lags by the frames read at its
// final step.
double utterance_al_ms(const TraceRecord& record, const Vocabulary& vocab,
                       std::string_view reference, AlVariant variant,
                       CharWordCommit mode = CharWordCommit::kAtSeparator);

// Scores records of a single configuration against the corpus references.
ResultRow score_records(const std::vector<TraceRecord>& records, const Corpus& corpus,
                        const Vocabulary& vocab, AlVariant variant,
                        CharWordCommit mode = CharWordCommit::kAtSeparator);

SweepResult run_sweep(const Model& model, const Corpus& corpus, const SweepGrid& grid,
                      const SweepOptions& options);

// Groups records by configuration and scores each group. Throws FormatError
// naming any id absent from the corpus.
std::vector<ResultRow> score_traces(const std::vector<TraceRecord>& records, const Corpus& corpus,
                                    const Vocabulary& vocab, AlVariant variant,
                                    CharWordCommit mode = CharWordCommit::kAtSeparator);

// Online rows by ascending AL (ties by k, s, N), then the offline row.
void sort_rows(std::vector<ResultRow>& rows);

// TSV with header "k s N bleu al_ms".
std::string format_results_tsv(const std::vector<ResultRow>& rows);
// pgfplots-style table "AL BLEU" of the online rows; the offline point is a
// trailing comment.
std::string format_plot_data(const std::vector<ResultRow>& rows);
// One JSON object per row with k, s, N, bleu, al_ms, al_variant.
std::string format_score_report(const std::vector<ResultRow>& rows);

std::string trace_file_name(const std::optional<PolicyConfig>& policy);

}  // namespace simulst
