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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "simulst/model.h"
#include "simulst/tokenizer.h"
#include "simulst/toy_model.h"
#include "simulst/types.h"

namespace simulst::testing {

inline Vocabulary char_vocab() { return make_char_vocabulary("etaoinshrd"); }

inline ToyModel toy_model(std::uint64_t seed, const ToyDims& dims = {}) {
  return ToyModel(generate_toy_model(seed, dims, char_vocab()));
}

// Uniform features in [-1, 1].
inline AudioFeatures random_features(std::mt19937_64& rng, std::size_t frames,
                                     std::size_t dim = 16) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(frames * dim);
  for (auto& x : v) x = u(rng);
  return AudioFeatures(std::move(v), frames, dim);
}

// Piecewise-constant features. Toy models respond to these far more
// distinctly than to white noise.
inline AudioFeatures segment_features(std::mt19937_64& rng, std::size_t frames,
                                      std::size_t dim = 16) {
  std::uniform_real_distribution<float> mean(-1.0f, 1.0f);
  std::uniform_real_distribution<float> noise(-0.1f, 0.1f);
  std::uniform_int_distribution<std::size_t> len(4, 16);
  std::vector<float> v;
  v.reserve(frames * dim);
  while (v.size() < frames * dim) {
    std::vector<float> m(dim);
    for (auto& x : m) x = mean(rng);
    for (std::size_t f = len(rng); f > 0 && v.size() < frames * dim; --f) {
      for (std::size_t d = 0; d < dim; ++d) v.push_back(m[d] + noise(rng));
    }
  }
  return AudioFeatures(std::move(v), frames, dim);
}

// Chooses the next token from (frames read, tokens committed so far).
using Script = std::function<TokenId(std::size_t frames_read, std::size_t committed)>;

// A model driven by a hand-written script instead of weights.
class ScriptedModel : public Model {
 public:
  ScriptedModel(Vocabulary vocab, std::size_t dim, Script script)
      : vocab_(std::move(vocab)), dim_(dim), script_(std::move(script)) {}

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t feature_dim() const override { return dim_; }
  std::unique_ptr<DecodingSession> open_session(std::string_view) const override {
    return std::make_unique<Session>(*this);
  }

  mutable std::vector<std::string> log;

 private:
  class Session : public DecodingSession {
   public:
    explicit Session(const ScriptedModel& m) : m_(m) {}
    void read(std::span<const float> frames) override {
      frames_ += frames.size() / m_.dim_;
      m_.log.push_back("read " + std::to_string(frames_));
    }
    std::size_t frames_read() const override { return frames_; }
    TokenScore decode(TokenId prev) override {
      m_.log.push_back("decode " + std::to_string(prev));
      return {m_.script_(frames_, committed_ + pending_++), 1.0f};
    }
    void commit(std::size_t n) override {
      m_.log.push_back("commit " + std::to_string(n));
      committed_ += n;
      pending_ = 0;
    }
    void rollback() override {
      m_.log.push_back("rollback");
      pending_ = 0;
    }
    void end() override { m_.log.push_back("end"); }

   private:
    const ScriptedModel& m_;
    std::size_t frames_ = 0;
    std::size_t committed_ = 0;
    std::size_t pending_ = 0;
  };

  Vocabulary vocab_;
  std::size_t dim_;
  Script script_;
};

inline std::filesystem::path data_dir() { return SIMULST_TEST_DATA_DIR; }

// A fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("simulst_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace simulst::testing
