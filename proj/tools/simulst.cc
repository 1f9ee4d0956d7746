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

// simulst command-line front end: gen, run, sweep, score, serve.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "simulst/bridge.h"
#include "simulst/error.h"
#include "simulst/harness.h"

namespace fs = std::filesystem;
using namespace simulst;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

// Options shared by the decoding subcommands.
struct Common {
  std::string manifest;
  std::string remote;
  std::string al_variant = "adaptive";
  std::string char_commit = "separator";
  std::optional<double> max_length_ratio;
  std::size_t jobs = 1;

  void add_to(CLI::App* app, bool decodes) {
    app->add_option("-m,--manifest", manifest, "Corpus manifest (JSON lines)")->required();
    app->add_option("--al-variant", al_variant, "adaptive, original, token or token_weighted")
        ->check(CLI::IsMember({"adaptive", "original", "token", "token_weighted"}));
    app->add_option("--char-commit", char_commit,
                    "Char-model word delay: at the following separator or the last char")
        ->check(CLI::IsMember({"separator", "last-char"}));
    if (!decodes) return;
    app->add_option("--remote", remote, "Decode through a bridge server at host:port");
    app->add_option("--max-length-ratio", max_length_ratio,
                    "Output cap relative to the encoder length (default: manifest value)");
    app->add_option("-j,--jobs", jobs, "Utterances decoded in parallel")->check(CLI::PositiveNumber);
  }

  AlVariant variant() const { return parse_al_variant(al_variant); }
  CharWordCommit commit_mode() const {
    return char_commit == "last-char" ? CharWordCommit::kAtLastChar : CharWordCommit::kAtSeparator;
  }
  double ratio(const Corpus& c) const { return max_length_ratio.value_or(c.manifest.max_length_ratio); }

  std::unique_ptr<Model> model(const Corpus& c) const {
    if (remote.empty()) return load_manifest_model(c.manifest);
    RemoteOptions opt;
    opt.expected_vocab_hash = load_vocabulary(c.manifest.vocab).hash();
    return remote_model(remote, opt);
  }
};

int cmd_gen(const SyntheticOptions& opt, const std::string& out, const std::string& granularity) {
  SyntheticOptions o = opt;
  o.granularity = parse_granularity(granularity);
  std::cout << gen_synthetic(o, out).string() << "\n";
  return 0;
}

int cmd_run(const Common& c, const std::optional<PolicyConfig>& policy, const std::string& traces) {
  const Corpus corpus = load_corpus(c.manifest);
  const auto model = c.model(corpus);
  const auto records = decode_corpus(*model, corpus, policy, c.ratio(corpus), c.jobs);
  if (!traces.empty()) save_trace_records(traces, records);
  const ResultRow row =
      score_records(records, corpus, model->vocabulary(), c.variant(), c.commit_mode());
  std::cout << format_results_tsv({row});
  return 0;
}

int cmd_sweep(const Common& c, SweepGrid grid, bool no_offline, const std::string& out) {
  const Corpus corpus = load_corpus(c.manifest);
  const auto model = c.model(corpus);
  grid.al_variant = c.variant();
  grid.char_commit = c.commit_mode();
  const SweepResult r = run_sweep(*model, corpus, grid, {c.ratio(corpus), c.jobs, !no_offline});
  const std::string tsv = format_results_tsv(r.rows);
  if (!out.empty()) {
    const fs::path dir(out);
    write_file(dir / "results.tsv", tsv);
    write_file(dir / "plot.dat", format_plot_data(r.rows));
    write_file(dir / "report.jsonl", format_score_report(r.rows));
    fs::create_directories(dir / "traces");
    for (const auto& group : r.traces) {
      save_trace_records(dir / "traces" / trace_file_name(group.front().policy), group);
    }
  }
  std::cout << tsv;
  return 0;
}

int cmd_score(const Common& c, const std::vector<std::string>& files, const std::string& report) {
  const Corpus corpus = load_corpus(c.manifest);
  const Vocabulary vocab = load_vocabulary(corpus.manifest.vocab);
  std::vector<TraceRecord> records;
  for (const auto& f : files) {
    auto part = load_trace_records(f);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto rows = score_traces(records, corpus, vocab, c.variant(), c.commit_mode());
  if (!report.empty()) write_file(report, format_score_report(rows));
  std::cout << format_results_tsv(rows);
  return 0;
}

int cmd_serve(const std::string& manifest, const std::string& bind) {
  const Manifest m = load_manifest(manifest);
  const auto model = load_manifest_model(m);
  // Block the signals before any thread starts so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  BridgeServer server(*model, Endpoint::parse(bind));
  server.start();
  std::cout << "listening on " << server.endpoint().to_string() << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous speech translation decoding and latency evaluation"};
  app.set_config("--config", "", "Read options from a TOML or INI file");
  app.require_subcommand(1);

  SyntheticOptions gen_opt;
  std::string gen_out, gen_granularity = "char";
  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus and toy model");
  gen->add_option("-o,--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_opt.seed, "Random seed");
  gen->add_option("-n,--utterances", gen_opt.utterances, "Number of utterances")
      ->check(CLI::PositiveNumber);
  gen->add_option("--min-frames", gen_opt.min_frames, "Shortest utterance in frames");
  gen->add_option("--max-frames", gen_opt.max_frames, "Longest utterance in frames");
  gen->add_option("--granularity", gen_granularity, "char or bpe")
      ->check(CLI::IsMember({"char", "bpe"}));
  gen->add_option("--max-length-ratio", gen_opt.max_length_ratio, "Output cap ratio");
  gen->add_option("--frame-ms", gen_opt.frame_ms, "Frame duration in ms");

  Common run_c;
  PolicyConfig run_p{100, 10, 1};
  bool run_offline = false;
  std::string run_traces;
  auto* run = app.add_subcommand("run", "Decode a corpus with one (k, s, N) configuration");
  run_c.add_to(run, true);
  run->add_option("-k", run_p.k, "Frames read before the first write")->check(CLI::PositiveNumber);
  run->add_option("-s", run_p.s, "Frames read per step")->check(CLI::PositiveNumber);
  run->add_option("-N", run_p.n, "Tokens written per step")->check(CLI::PositiveNumber);
  run->add_flag("--offline", run_offline, "Decode with the full source instead");
  run->add_option("--traces", run_traces, "Write trace records to this file");

  Common sweep_c;
  SweepGrid grid{{100, 200}, {10, 20}, {1, 2, 3}};
  bool no_offline = false;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Decode a corpus over a (k, s, N) grid");
  sweep_c.add_to(sweep, true);
  sweep->add_option("-k", grid.k, "k values")->delimiter(',');
  sweep->add_option("-s", grid.s, "s values")->delimiter(',');
  sweep->add_option("-N", grid.n, "N values")->delimiter(',');
  sweep->add_flag("--no-offline", no_offline, "Skip the offline row");
  sweep->add_option("-o,--out", sweep_out,
                    "Directory for results.tsv, plot.dat, report.jsonl and traces/");

  Common score_c;
  std::vector<std::string> score_files;
  std::string score_report;
  auto* score = app.add_subcommand("score", "Re-score stored trace files");
  score_c.add_to(score, false);
  score->add_option("traces", score_files, "Trace files")->required()->check(CLI::ExistingFile);
  score->add_option("--report", score_report, "Write JSON-lines score records here");

  std::string serve_manifest, serve_bind = "127.0.0.1:0";
  auto* serve = app.add_subcommand("serve", "Serve the manifest's model over the bridge protocol");
  serve->add_option("-m,--manifest", serve_manifest, "Corpus manifest")->required();
  serve->add_option("--listen", serve_bind, "host:port to bind; port 0 picks a free port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_opt, gen_out, gen_granularity);
    if (*run) {
      return cmd_run(run_c, run_offline ? std::nullopt : std::optional(run_p), run_traces);
    }
    if (*sweep) return cmd_sweep(sweep_c, grid, no_offline, sweep_out);
    if (*score) return cmd_score(score_c, score_files, score_report);
    if (*serve) return cmd_serve(serve_manifest, serve_bind);
  } catch (const std::exception& e) {
    std::cerr << "simulst: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
