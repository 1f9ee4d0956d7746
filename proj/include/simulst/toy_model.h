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

// Miniature attention encoder-decoder with seeded random weights.
//
// Encoder: two conv blocks (3x3 conv, ReLU, 3x3 conv, ReLU, 2x2 max-pool)
// take T x D features to ceil(T/4) x ceil(D/4) per channel, followed by
// bidirectional LSTM layers. Pooling replicates the last row/column when a
// side is odd. Decoder: additive attention queried by the top decoder layer,
// an LSTM stack fed [embedding(y_prev); context], and a linear projection of
// [h_top; context] to vocabulary scores.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "simulst/model.h"
#include "simulst/tensor.h"
#include "simulst/types.h"

namespace simulst {

struct ToyDims {
  std::size_t feature_dim = 16;     // D
  std::size_t conv_channels1 = 4;   // first conv block
  std::size_t conv_channels2 = 4;   // second conv block
  std::size_t encoder_layers = 2;
  std::size_t encoder_dim = 16;     // E, both directions concatenated
  std::size_t attention_dim = 16;
  std::size_t embedding_dim = 16;
  std::size_t decoder_layers = 2;
  std::size_t decoder_dim = 16;

  void validate() const;
  bool operator==(const ToyDims&) const = default;
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
};

// Every tensor the architecture needs, in generation order.
std::vector<TensorSpec> toy_tensor_specs(const ToyDims& dims, std::size_t vocab_size);

struct ToyModelWeights {
  ToyDims dims;
  Vocabulary vocab;
  std::uint64_t seed = 0;
  TensorMap tensors;

  // Rebuilds dims and seed from the meta.* tensors and checks every declared
  // shape. Throws FormatError when anything is missing or mis-shaped.
  static ToyModelWeights from_tensors(TensorMap tensors, Vocabulary vocab);

  // Includes the meta.* tensors.
  const TensorMap& all_tensors() const { return tensors; }
};

// Uniform [-0.1, 0.1] weight matrices and zero biases, drawn from a 64-bit
// Mersenne Twister. The float conversion is spelled out so files are
// identical across standard libraries.
ToyModelWeights generate_toy_model(std::uint64_t seed, const ToyDims& dims,
                                   const Vocabulary& vocab);

void save_toy_model(const std::filesystem::path& path, const ToyModelWeights& weights);
ToyModelWeights load_toy_model(const std::filesystem::path& path, const Vocabulary& vocab);

class ToyModel : public EncoderDecoderModel {
 public:
  explicit ToyModel(ToyModelWeights weights);

  const Vocabulary& vocabulary() const override { return weights_.vocab; }
  std::size_t feature_dim() const override { return weights_.dims.feature_dim; }
  const ToyDims& dims() const { return weights_.dims; }
  const ToyModelWeights& weights() const { return weights_; }

  EncoderStates encode(const AudioFeatures& prefix) const override;
  DecodeOutput decode_step(const EncoderStates& enc, const DecoderState& z_prev,
                           TokenId y_prev) const override;
  DecoderState init_decoder_state() const override;

 private:
  const Tensor& tensor(const std::string& name) const;

  ToyModelWeights weights_;
};

}  // namespace simulst
