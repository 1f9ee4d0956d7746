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

#include "simulst/records.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "simulst/error.h"

namespace simulst {

using nlohmann::json;

std::optional<std::size_t> Manifest::find(std::string_view id) const {
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    if (utterances[i].id == id) return i;
  }
  return std::nullopt;
}

void write_manifest(std::ostream& out, const Manifest& m) {
  json header{{"frame_ms", m.frame_ms},
              {"model", m.model.generic_string()},
              {"vocab", m.vocab.generic_string()},
              {"max_length_ratio", m.max_length_ratio}};
  if (!m.merges.empty()) header["merges"] = m.merges.generic_string();
  out << header.dump() << '\n';
  for (const auto& u : m.utterances) {
    out << json{{"id", u.id}, {"features", u.features.generic_string()},
                {"reference", u.reference}}
               .dump()
        << '\n';
  }
}

Manifest read_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.contains("id")) {
        if (have_header) throw FormatError("second header line");
        have_header = true;
        m.frame_ms = j.value("frame_ms", AudioFeatures::kDefaultFrameMs);
        m.model = j.value("model", std::string());
        m.vocab = j.value("vocab", std::string());
        m.merges = j.value("merges", std::string());
        m.max_length_ratio = j.value("max_length_ratio", 1.0);
        continue;
      }
      m.utterances.push_back({j.at("id").get<std::string>(),
                              j.at("features").get<std::string>(),
                              j.value("reference", std::string())});
    } catch (const json::exception& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!(m.frame_ms > 0.0)) throw FormatError("manifest: frame_ms must be positive");
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_manifest(out, manifest);
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Manifest m = read_manifest(in);
  const auto base = path.parent_path();
  auto resolve = [&base](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(m.model);
  resolve(m.vocab);
  resolve(m.merges);
  std::set<std::string> ids;
  for (auto& u : m.utterances) {
    if (!ids.insert(u.id).second) throw FormatError("manifest: duplicate id '" + u.id + "'");
    resolve(u.features);
  }
  return m;
}

std::string trace_record_to_json(const TraceRecord& record) {
  const OnlineResult& r = record.result;
  json steps = json::array();
  std::size_t next = 0;
  for (const auto& step : r.trace.steps) {
    json tokens = json::array();
    for (std::size_t i = 0; i < step.emitted; ++i) tokens.push_back(r.hypothesis.token_ids.at(next++));
    steps.push_back({{"t", step.t}, {"g", step.frames_read}, {"tokens", std::move(tokens)}});
  }
  json j{{"id", record.id}};
  if (record.policy) {
    j["config"] = {{"k", record.policy->k}, {"s", record.policy->s}, {"N", record.policy->n}};
  } else {
    j["config"] = "offline";
  }
  j["src_len"] = r.trace.src_len;
  j["frame_ms"] = r.trace.frame_ms;
  j["steps"] = std::move(steps);
  j["stop_reason"] = std::string(stop_reason_name(r.stop_reason));
  return j.dump();
}

TraceRecord trace_record_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    TraceRecord rec;
    rec.id = j.at("id").get<std::string>();
    const json& config = j.at("config");
    if (config.is_string()) {
      if (config.get<std::string>() != "offline") throw FormatError("unknown config tag");
    } else {
      rec.policy = PolicyConfig{config.at("k").get<std::size_t>(), config.at("s").get<std::size_t>(),
                                config.at("N").get<std::size_t>()};
    }
    OnlineResult& r = rec.result;
    r.trace.src_len = j.at("src_len").get<std::size_t>();
    r.trace.frame_ms = j.at("frame_ms").get<double>();
    for (const auto& step : j.at("steps")) {
      const auto t = step.at("t").get<std::size_t>();
      const auto tokens = step.at("tokens").get<std::vector<TokenId>>();
      r.trace.steps.push_back({t, step.at("g").get<std::size_t>(), tokens.size()});
      for (TokenId id : tokens) {
        r.hypothesis.token_ids.push_back(id);
        r.hypothesis.emitted_at_step.push_back(t);
      }
    }
    r.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
    return rec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("trace record: ") + e.what());
  }
}

void write_trace_records(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const auto& r : records) out << trace_record_to_json(r) << '\n';
}

std::vector<TraceRecord> read_trace_records(std::istream& in) {
  std::vector<TraceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(trace_record_from_json(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void save_trace_records(const std::filesystem::path& path,
                        const std::vector<TraceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_trace_records(out, records);
}

std::vector<TraceRecord> load_trace_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_trace_records(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace simulst
