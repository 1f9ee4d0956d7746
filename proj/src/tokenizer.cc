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

#include "simulst/tokenizer.h"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "simulst/error.h"

namespace simulst {

namespace {

bool has_continuation(std::string_view piece) {
  return piece.size() >= kContinuation.size() &&
         piece.substr(piece.size() - kContinuation.size()) == kContinuation;
}

std::string_view strip_continuation(std::string_view piece) {
  return has_continuation(piece) ? piece.substr(0, piece.size() - kContinuation.size()) : piece;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t next = text.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? text.size() : next;
    if (end > pos) words.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return words;
}

}  // namespace

BpeModel::BpeModel(std::vector<Merge> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    if (merges_[i].first.empty() || merges_[i].second.empty()) {
      throw ArgumentError("bpe: empty merge symbol on rule " + std::to_string(i + 1));
    }
    rank_.emplace(merges_[i], i);  // first occurrence wins
  }
}

std::vector<std::string> BpeModel::segment(std::string_view word) const {
  std::vector<std::string> symbols = split_code_points(word);
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank_.find({symbols[i], symbols[i + 1]});
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    const Merge& merge = merges_[best_rank];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == merge.first && symbols[i + 1] == merge.second) {
        merged.push_back(symbols[i] + symbols[i + 1]);
        ++i;
      } else {
        merged.push_back(std::move(symbols[i]));
      }
    }
    symbols = std::move(merged);
  }
  return symbols;
}

BpeModel read_bpe_merges(std::istream& in) {
  std::vector<BpeModel::Merge> merges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string left, right, extra;
    if (!(fields >> left >> right) || (fields >> extra)) {
      throw FormatError("bpe merges: line " + std::to_string(line_no) +
                        " is not a 'left right' pair");
    }
    merges.emplace_back(std::move(left), std::move(right));
  }
  return BpeModel(std::move(merges));
}

void write_bpe_merges(std::ostream& out, const BpeModel& bpe) {
  for (const auto& [left, right] : bpe.merges()) out << left << ' ' << right << '\n';
}

BpeModel load_bpe_merges(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_bpe_merges(in);
}

void save_bpe_merges(const std::filesystem::path& path, const BpeModel& bpe) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_bpe_merges(out, bpe);
}

std::vector<std::string> split_code_points(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    if (lead < 0x80) len = 1;
    else if ((lead >> 5) == 0x6) len = 2;
    else if ((lead >> 4) == 0xe) len = 3;
    else if ((lead >> 3) == 0x1e) len = 4;
    else throw FormatError("invalid UTF-8 lead byte");
    if (i + len > text.size()) throw FormatError("truncated UTF-8 sequence");
    for (std::size_t j = 1; j < len; ++j) {
      if ((static_cast<unsigned char>(text[i + j]) >> 6) != 0x2) {
        throw FormatError("invalid UTF-8 continuation byte");
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Vocabulary make_char_vocabulary(std::string_view alphabet) {
  std::vector<std::string> tokens{std::string(Vocabulary::kBos), std::string(Vocabulary::kEos),
                                  std::string(kSpaceToken)};
  std::set<std::string> seen(tokens.begin(), tokens.end());
  for (auto& cp : split_code_points(alphabet)) {
    if (seen.insert(cp).second) tokens.push_back(std::move(cp));
  }
  return Vocabulary(std::move(tokens), 0, 1, Granularity::kChar);
}

Vocabulary make_bpe_vocabulary(std::string_view alphabet, const BpeModel& bpe) {
  std::vector<std::string> tokens{std::string(Vocabulary::kBos), std::string(Vocabulary::kEos)};
  std::set<std::string> seen(tokens.begin(), tokens.end());
  auto add = [&](const std::string& symbol) {
    if (symbol == " " || has_continuation(symbol)) {
      throw ArgumentError("bpe vocabulary: symbol '" + symbol + "' is not allowed");
    }
    if (!seen.insert(symbol).second) return;
    tokens.push_back(symbol + std::string(kContinuation));
    tokens.push_back(symbol);
  };
  for (const auto& cp : split_code_points(alphabet)) {
    if (cp != " ") add(cp);
  }
  for (const auto& [left, right] : bpe.merges()) add(left + right);
  return Vocabulary(std::move(tokens), 0, 1, Granularity::kBpe);
}

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab,
                              const BpeModel& bpe) {
  if (text.empty()) throw ArgumentError("tokenize: empty text");
  std::vector<TokenId> ids;
  if (vocab.granularity() == Granularity::kChar) {
    for (const auto& cp : split_code_points(text)) ids.push_back(vocab.id(cp));
    return ids;
  }
  for (auto word : split_words(text)) {
    auto pieces = bpe.segment(word);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i + 1 < pieces.size()) pieces[i] += kContinuation;
      ids.push_back(vocab.id(pieces[i]));
    }
  }
  return ids;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  if (vocab.granularity() == Granularity::kChar) {
    for (TokenId id : ids) {
      if (!vocab.is_special(id)) out += vocab.token(id);
    }
    return out;
  }
  bool open_word = false;
  for (TokenId id : ids) {
    if (vocab.is_special(id)) continue;
    const std::string& piece = vocab.token(id);
    if (!open_word && !out.empty()) out += ' ';
    out += strip_continuation(piece);
    open_word = has_continuation(piece);
  }
  return out;
}

std::vector<WordCompletion> word_boundaries(std::span<const TimedToken> tokens,
                                            const Vocabulary& vocab, CharWordCommit mode) {
  std::vector<WordCompletion> words;
  std::string current;
  std::size_t last_piece_step = 0;
  auto finish = [&](std::size_t step) {
    if (current.empty()) return;
    words.push_back({std::move(current), step});
    current.clear();
  };
  const bool char_mode = vocab.granularity() == Granularity::kChar;
  auto charged = [&](std::size_t separator_step) {
    return char_mode && mode == CharWordCommit::kAtLastChar ? last_piece_step : separator_step;
  };

  for (const TimedToken& tok : tokens) {
    if (tok.id == vocab.eos()) {
      finish(charged(tok.step));
      return words;
    }
    if (tok.id == vocab.bos()) continue;
    const std::string& piece = vocab.token(tok.id);
    if (char_mode) {
      if (piece == kSpaceToken) {
        finish(charged(tok.step));
      } else {
        current += piece;
        last_piece_step = tok.step;
      }
      continue;
    }
    current += strip_continuation(piece);
    last_piece_step = tok.step;
    if (!has_continuation(piece)) finish(tok.step);
  }
  // Stream ended without </s>: the trailing word completes with its last piece.
  finish(last_piece_step);
  return words;
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::json j;
  j["granularity"] = std::string(granularity_name(vocab.granularity()));
  j["bos"] = vocab.bos();
  j["eos"] = vocab.eos();
  j["tokens"] = vocab.tokens();
  return j.dump(1);
}

Vocabulary vocabulary_from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), j.at("bos").get<TokenId>(),
                      j.at("eos").get<TokenId>(),
                      parse_granularity(j.at("granularity").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("vocabulary: ") + e.what());
  }
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << vocabulary_to_json(vocab) << '\n';
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return vocabulary_from_json(buffer.str());
}

}  // namespace simulst
