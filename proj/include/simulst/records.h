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

// Line-delimited JSON files shared by the harness and the CLI.
//
// Manifest: a header line {"frame_ms":..,"model":..,"vocab":..,"merges":..,
// "max_length_ratio":..} followed by one {"id","features","reference"} line
// per utterance. Relative paths resolve against the manifest's directory.
//
// Trace file: one record per utterance,
//   {"id":..,"config":{"k":..,"s":..,"N":..}|"offline","src_len":..,
//    "frame_ms":..,"steps":[{"t":..,"g":..,"tokens":[..]},..],
//    "stop_reason":"eos_after_full_read"|"max_length"}

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "simulst/engine.h"
#include "simulst/types.h"

namespace simulst {

struct ManifestEntry {
  std::string id;
  std::filesystem::path features;
  std::string reference;
};

struct Manifest {
  double frame_ms = AudioFeatures::kDefaultFrameMs;
  std::filesystem::path model;   // SSTM weights
  std::filesystem::path vocab;   // vocabulary JSON
  std::filesystem::path merges;  // BPE merges, empty for char models
  double max_length_ratio = 1.0;
  std::vector<ManifestEntry> utterances;

  // Index of `id` in utterances, or nullopt.
  std::optional<std::size_t> find(std::string_view id) const;
};

void write_manifest(std::ostream& out, const Manifest& manifest);
// Paths stay as written; see load_manifest for resolution.
Manifest read_manifest(std::istream& in);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
// Resolves relative paths against the manifest directory and rejects
// duplicate ids.
Manifest load_manifest(const std::filesystem::path& path);

struct TraceRecord {
  std::string id;
  std::optional<PolicyConfig> policy;  // nullopt: offline decoding
  OnlineResult result;
};

std::string trace_record_to_json(const TraceRecord& record);
TraceRecord trace_record_from_json(std::string_view line);

void write_trace_records(std::ostream& out, const std::vector<TraceRecord>& records);
std::vector<TraceRecord> read_trace_records(std::istream& in);
void save_trace_records(const std::filesystem::path& path,
                        const std::vector<TraceRecord>& records);
std::vector<TraceRecord> load_trace_records(const std::filesystem::path& path);

}  // namespace simulst
