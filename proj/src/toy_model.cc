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

#include "simulst/toy_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "simulst/error.h"

namespace simulst {

namespace {

constexpr std::size_t kMetaDims = 10;

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// y += W x for a rank-2 W.
void matvec_add(const Tensor& w, std::span<const float> x, std::span<float> y) {
  const std::size_t rows = w.shape[0];
  const std::size_t cols = w.shape[1];
  const float* p = w.values.data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    float acc = 0.0f;
    for (std::size_t c = 0; c < cols; ++c) acc += p[c] * x[c];
    y[r] += acc;
  }
}

struct LstmWeights {
  const Tensor* w_ih = nullptr;
  const Tensor* w_hh = nullptr;
  const Tensor* bias = nullptr;
  std::size_t hidden = 0;
};

// One LSTM step, gate order (input, forget, cell, output).
void lstm_step(const LstmWeights& lw, std::span<const float> x, std::vector<float>& h,
               std::vector<float>& c) {
  const std::size_t n = lw.hidden;
  std::vector<float> gates(lw.bias->values);
  matvec_add(*lw.w_ih, x, gates);
  matvec_add(*lw.w_hh, h, gates);
  for (std::size_t j = 0; j < n; ++j) {
    const float i = sigmoid(gates[j]);
    const float f = sigmoid(gates[n + j]);
    const float g = std::tanh(gates[2 * n + j]);
    const float o = sigmoid(gates[3 * n + j]);
    c[j] = f * c[j] + i * g;
    h[j] = o * std::tanh(c[j]);
  }
}

// Channel-major [channels][time][freq] activations.
struct FeatureMap {
  std::size_t channels = 0;
  std::size_t time = 0;
  std::size_t freq = 0;
  std::vector<float> v;

  float& at(std::size_t ch, std::size_t t, std::size_t f) {
    return v[(ch * time + t) * freq + f];
  }
  float at(std::size_t ch, std::size_t t, std::size_t f) const {
    return v[(ch * time + t) * freq + f];
  }
};

// 3x3 convolution, stride 1, zero padding of one, followed by ReLU.
FeatureMap conv3x3_relu(const FeatureMap& in, const Tensor& weight, const Tensor& bias) {
  const std::size_t out_ch = weight.shape[0];
  FeatureMap out{out_ch, in.time, in.freq, std::vector<float>(out_ch * in.time * in.freq)};
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t t = 0; t < in.time; ++t) {
      for (std::size_t f = 0; f < in.freq; ++f) {
        float acc = bias.values[o];
        for (std::size_t i = 0; i < in.channels; ++i) {
          const float* w = &weight.values[(o * in.channels + i) * 9];
          for (int dt = -1; dt <= 1; ++dt) {
            const auto tt = static_cast<std::ptrdiff_t>(t) + dt;
            if (tt < 0 || tt >= static_cast<std::ptrdiff_t>(in.time)) continue;
            for (int df = -1; df <= 1; ++df) {
              const auto ff = static_cast<std::ptrdiff_t>(f) + df;
              if (ff < 0 || ff >= static_cast<std::ptrdiff_t>(in.freq)) continue;
              acc += w[(dt + 1) * 3 + (df + 1)] *
                     in.at(i, static_cast<std::size_t>(tt), static_cast<std::size_t>(ff));
            }
          }
        }
        out.at(o, t, f) = std::max(acc, 0.0f);
      }
    }
  }
  return out;
}

// 2x2 max-pool, stride 2. An odd side is padded by repeating its last entry,
// so the output has ceil(time/2) x ceil(freq/2) cells.
FeatureMap max_pool2x2(const FeatureMap& in) {
  FeatureMap out{in.channels, ceil_div(in.time, 2), ceil_div(in.freq, 2), {}};
  out.v.resize(out.channels * out.time * out.freq);
  for (std::size_t ch = 0; ch < in.channels; ++ch) {
    for (std::size_t t = 0; t < out.time; ++t) {
      const std::size_t t0 = 2 * t;
      const std::size_t t1 = std::min(t0 + 1, in.time - 1);
      for (std::size_t f = 0; f < out.freq; ++f) {
        const std::size_t f0 = 2 * f;
        const std::size_t f1 = std::min(f0 + 1, in.freq - 1);
        out.at(ch, t, f) = std::max({in.at(ch, t0, f0), in.at(ch, t0, f1),
                                     in.at(ch, t1, f0), in.at(ch, t1, f1)});
      }
    }
  }
  return out;
}

std::string enc_prefix(std::size_t layer, bool backward) {
  return "enc.l" + std::to_string(layer) + (backward ? ".bwd" : ".fwd");
}

std::string dec_prefix(std::size_t layer) { return "dec.l" + std::to_string(layer); }

LstmWeights lstm_weights(const TensorMap& tensors, const std::string& prefix,
                         std::size_t hidden) {
  return {&tensors.at(prefix + ".w_ih"), &tensors.at(prefix + ".w_hh"),
          &tensors.at(prefix + ".bias"), hidden};
}

}  // namespace

void ToyDims::validate() const {
  if (feature_dim < 1 || conv_channels1 < 1 || conv_channels2 < 1 || encoder_layers < 1 ||
      encoder_dim < 2 || attention_dim < 1 || embedding_dim < 1 || decoder_layers < 1 ||
      decoder_dim < 1) {
    throw ArgumentError("toy model: every dimension must be positive");
  }
  if (encoder_dim % 2 != 0) {
    throw ArgumentError("toy model: encoder_dim must be even (two directions)");
  }
}

std::vector<TensorSpec> toy_tensor_specs(const ToyDims& d, std::size_t vocab_size) {
  d.validate();
  std::vector<TensorSpec> specs;
  auto conv = [&specs](const std::string& name, std::size_t out, std::size_t in) {
    specs.push_back({name + ".weight", {out, in, 3, 3}});
    specs.push_back({name + ".bias", {out}});
  };
  conv("conv1a", d.conv_channels1, 1);
  conv("conv1b", d.conv_channels1, d.conv_channels1);
  conv("conv2a", d.conv_channels2, d.conv_channels1);
  conv("conv2b", d.conv_channels2, d.conv_channels2);

  auto lstm = [&specs](const std::string& prefix, std::size_t in, std::size_t hidden) {
    specs.push_back({prefix + ".w_ih", {4 * hidden, in}});
    specs.push_back({prefix + ".w_hh", {4 * hidden, hidden}});
    specs.push_back({prefix + ".bias", {4 * hidden}});
  };
  const std::size_t half = d.encoder_dim / 2;
  const std::size_t conv_out = d.conv_channels2 * ceil_div(d.feature_dim, 4);
  for (std::size_t l = 0; l < d.encoder_layers; ++l) {
    const std::size_t in = l == 0 ? conv_out : d.encoder_dim;
    lstm(enc_prefix(l, false), in, half);
    lstm(enc_prefix(l, true), in, half);
  }

  specs.push_back({"att.w_enc", {d.attention_dim, d.encoder_dim}});
  specs.push_back({"att.w_dec", {d.attention_dim, d.decoder_dim}});
  specs.push_back({"att.bias", {d.attention_dim}});
  specs.push_back({"att.v", {d.attention_dim}});

  specs.push_back({"embed", {vocab_size, d.embedding_dim}});
  for (std::size_t l = 0; l < d.decoder_layers; ++l) {
    const std::size_t in = l == 0 ? d.embedding_dim + d.encoder_dim : d.decoder_dim;
    lstm(dec_prefix(l), in, d.decoder_dim);
  }
  specs.push_back({"out.weight", {vocab_size, d.decoder_dim + d.encoder_dim}});
  specs.push_back({"out.bias", {vocab_size}});
  return specs;
}

namespace {

Tensor meta_dims_tensor(const ToyDims& d, std::size_t vocab_size) {
  return Tensor({kMetaDims},
                {static_cast<float>(d.feature_dim), static_cast<float>(d.conv_channels1),
                 static_cast<float>(d.conv_channels2), static_cast<float>(d.encoder_layers),
                 static_cast<float>(d.encoder_dim), static_cast<float>(d.attention_dim),
                 static_cast<float>(d.embedding_dim), static_cast<float>(d.decoder_layers),
                 static_cast<float>(d.decoder_dim), static_cast<float>(vocab_size)});
}

// The seed as four 16-bit chunks, each exactly representable in f32.
Tensor meta_seed_tensor(std::uint64_t seed) {
  Tensor t({4});
  for (int i = 0; i < 4; ++i) t.values[i] = static_cast<float>((seed >> (16 * i)) & 0xffff);
  return t;
}

std::size_t read_count(float v, const char* what) {
  if (!(v >= 0.0f) || v > 1e7f || std::floor(v) != v) {
    throw FormatError(std::string("toy model: bad meta value for ") + what);
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

ToyModelWeights ToyModelWeights::from_tensors(TensorMap tensors, Vocabulary vocab) {
  auto dims_it = tensors.find("meta.dims");
  auto seed_it = tensors.find("meta.seed");
  if (dims_it == tensors.end() || seed_it == tensors.end()) {
    throw FormatError("toy model: missing meta.dims / meta.seed tensors");
  }
  const Tensor& m = dims_it->second;
  if (m.shape != std::vector<std::size_t>{kMetaDims}) {
    throw FormatError("toy model: meta.dims has wrong shape");
  }
  ToyDims dims;
  dims.feature_dim = read_count(m.values[0], "feature_dim");
  dims.conv_channels1 = read_count(m.values[1], "conv_channels1");
  dims.conv_channels2 = read_count(m.values[2], "conv_channels2");
  dims.encoder_layers = read_count(m.values[3], "encoder_layers");
  dims.encoder_dim = read_count(m.values[4], "encoder_dim");
  dims.attention_dim = read_count(m.values[5], "attention_dim");
  dims.embedding_dim = read_count(m.values[6], "embedding_dim");
  dims.decoder_layers = read_count(m.values[7], "decoder_layers");
  dims.decoder_dim = read_count(m.values[8], "decoder_dim");
  const std::size_t vocab_size = read_count(m.values[9], "vocab_size");
  if (vocab_size != vocab.size()) {
    throw FormatError("toy model: weights expect " + std::to_string(vocab_size) +
                      " tokens, vocabulary has " + std::to_string(vocab.size()));
  }
  try {
    dims.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(e.what());
  }

  const Tensor& s = seed_it->second;
  if (s.shape != std::vector<std::size_t>{4}) throw FormatError("toy model: bad meta.seed");
  std::uint64_t seed = 0;
  for (int i = 0; i < 4; ++i) {
    seed |= static_cast<std::uint64_t>(read_count(s.values[i], "seed")) << (16 * i);
  }

  for (const auto& spec : toy_tensor_specs(dims, vocab_size)) {
    auto it = tensors.find(spec.name);
    if (it == tensors.end()) throw FormatError("toy model: missing tensor '" + spec.name + "'");
    if (it->second.shape != spec.shape) {
      throw FormatError("toy model: tensor '" + spec.name + "' has the wrong shape");
    }
  }
  return ToyModelWeights{dims, std::move(vocab), seed, std::move(tensors)};
}

ToyModelWeights generate_toy_model(std::uint64_t seed, const ToyDims& dims,
                                   const Vocabulary& vocab) {
  std::mt19937_64 rng(seed);
  TensorMap tensors;
  for (auto& spec : toy_tensor_specs(dims, vocab.size())) {
    Tensor t(spec.shape);
    // Biases start at zero.
    if (spec.name.ends_with(".bias")) {
      tensors.emplace(spec.name, std::move(t));
      continue;
    }
    for (auto& v : t.values) {
      // Top 24 bits give a uniform float grid on [0, 1).
      const double u = static_cast<double>(rng() >> 40) / 16777216.0;
      v = static_cast<float>(-0.1 + 0.2 * u);
    }
    tensors.emplace(spec.name, std::move(t));
  }
  tensors.emplace("meta.dims", meta_dims_tensor(dims, vocab.size()));
  tensors.emplace("meta.seed", meta_seed_tensor(seed));
  return ToyModelWeights{dims, vocab, seed, std::move(tensors)};
}

void save_toy_model(const std::filesystem::path& path, const ToyModelWeights& weights) {
  save_tensors(path, weights.tensors);
}

ToyModelWeights load_toy_model(const std::filesystem::path& path, const Vocabulary& vocab) {
  return ToyModelWeights::from_tensors(load_tensors(path), vocab);
}

ToyModel::ToyModel(ToyModelWeights weights) : weights_(std::move(weights)) {
  // Re-validate so hand-assembled weights get the same checks as loaded ones.
  for (const auto& spec : toy_tensor_specs(weights_.dims, weights_.vocab.size())) {
    auto it = weights_.tensors.find(spec.name);
    if (it == weights_.tensors.end() || it->second.shape != spec.shape) {
      throw ConfigError("toy model: tensor '" + spec.name + "' missing or mis-shaped");
    }
  }
}

const Tensor& ToyModel::tensor(const std::string& name) const {
  return weights_.tensors.at(name);
}

EncoderStates ToyModel::encode(const AudioFeatures& prefix) const {
  const ToyDims& d = weights_.dims;
  if (prefix.num_frames() < 1) throw ArgumentError("encode: empty prefix");
  if (prefix.dim() != d.feature_dim) {
    throw ConfigError("encode: features have dimension " + std::to_string(prefix.dim()) +
                      ", model expects " + std::to_string(d.feature_dim));
  }
  FeatureMap x{1, prefix.num_frames(), prefix.dim(),
               std::vector<float>(prefix.values().begin(), prefix.values().end())};
  x = conv3x3_relu(x, tensor("conv1a.weight"), tensor("conv1a.bias"));
  x = conv3x3_relu(x, tensor("conv1b.weight"), tensor("conv1b.bias"));
  x = max_pool2x2(x);
  x = conv3x3_relu(x, tensor("conv2a.weight"), tensor("conv2a.bias"));
  x = conv3x3_relu(x, tensor("conv2b.weight"), tensor("conv2b.bias"));
  x = max_pool2x2(x);

  const std::size_t steps = x.time;
  std::size_t width = x.channels * x.freq;
  std::vector<float> seq(steps * width);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t ch = 0; ch < x.channels; ++ch) {
      for (std::size_t f = 0; f < x.freq; ++f) seq[t * width + ch * x.freq + f] = x.at(ch, t, f);
    }
  }

  const std::size_t half = d.encoder_dim / 2;
  for (std::size_t l = 0; l < d.encoder_layers; ++l) {
    std::vector<float> next(steps * d.encoder_dim);
    for (int dir = 0; dir < 2; ++dir) {
      const bool backward = dir == 1;
      const LstmWeights lw = lstm_weights(weights_.tensors, enc_prefix(l, backward), half);
      std::vector<float> h(half, 0.0f), c(half, 0.0f);
      for (std::size_t i = 0; i < steps; ++i) {
        const std::size_t t = backward ? steps - 1 - i : i;
        lstm_step(lw, std::span<const float>(seq).subspan(t * width, width), h, c);
        std::copy(h.begin(), h.end(), next.begin() + t * d.encoder_dim + dir * half);
      }
    }
    seq = std::move(next);
    width = d.encoder_dim;
  }
  return EncoderStates{std::move(seq), steps, d.encoder_dim, prefix.num_frames()};
}

DecoderState ToyModel::init_decoder_state() const {
  const ToyDims& d = weights_.dims;
  DecoderState z;
  z.layers.assign(d.decoder_layers, RecurrentState{std::vector<float>(d.decoder_dim, 0.0f),
                                                   std::vector<float>(d.decoder_dim, 0.0f)});
  z.context.assign(d.encoder_dim, 0.0f);
  return z;
}

DecodeOutput ToyModel::decode_step(const EncoderStates& enc, const DecoderState& z_prev,
                                   TokenId y_prev) const {
  const ToyDims& d = weights_.dims;
  if (z_prev.layers.size() != d.decoder_layers || z_prev.context.size() != d.encoder_dim) {
    throw StateError("decode_step: decoder state has the wrong layer count or context size");
  }
  for (const auto& layer : z_prev.layers) {
    if (layer.h.size() != d.decoder_dim || layer.c.size() != d.decoder_dim) {
      throw StateError("decode_step: decoder layer width does not match the model");
    }
  }
  if (enc.dim != d.encoder_dim || enc.num_states < 1 ||
      enc.hidden.size() != enc.num_states * enc.dim) {
    throw StateError("decode_step: encoder states do not match the model");
  }
  if (!weights_.vocab.contains(y_prev)) {
    throw ArgumentError("decode_step: previous token id " + std::to_string(y_prev) +
                        " out of range");
  }

  // Additive attention: e_i = v . tanh(W_enc h_i + W_dec q + b).
  const Tensor& w_enc = tensor("att.w_enc");
  const Tensor& v = tensor("att.v");
  std::vector<float> query(tensor("att.bias").values);
  matvec_add(tensor("att.w_dec"), z_prev.layers.back().h, query);
  std::vector<float> energy(enc.num_states);
  std::vector<float> proj(d.attention_dim);
  for (std::size_t i = 0; i < enc.num_states; ++i) {
    std::copy(query.begin(), query.end(), proj.begin());
    matvec_add(w_enc, enc.row(i), proj);
    float e = 0.0f;
    for (std::size_t a = 0; a < d.attention_dim; ++a) e += v.values[a] * std::tanh(proj[a]);
    energy[i] = e;
  }
  const float max_e = *std::max_element(energy.begin(), energy.end());
  float total = 0.0f;
  for (auto& e : energy) {
    e = std::exp(e - max_e);
    total += e;
  }
  for (auto& e : energy) e /= total;

  DecodeOutput out;
  out.state.context.assign(d.encoder_dim, 0.0f);
  for (std::size_t i = 0; i < enc.num_states; ++i) {
    const auto h = enc.row(i);
    for (std::size_t j = 0; j < d.encoder_dim; ++j) out.state.context[j] += energy[i] * h[j];
  }

  const Tensor& embed = tensor("embed");
  const std::size_t y = static_cast<std::size_t>(y_prev);
  std::vector<float> input(embed.values.begin() + y * d.embedding_dim,
                           embed.values.begin() + (y + 1) * d.embedding_dim);
  input.insert(input.end(), out.state.context.begin(), out.state.context.end());

  out.state.layers = z_prev.layers;
  for (std::size_t l = 0; l < d.decoder_layers; ++l) {
    auto& layer = out.state.layers[l];
    lstm_step(lstm_weights(weights_.tensors, dec_prefix(l), d.decoder_dim), input, layer.h,
              layer.c);
    input = layer.h;
  }

  std::vector<float> readout(out.state.layers.back().h);
  readout.insert(readout.end(), out.state.context.begin(), out.state.context.end());
  out.scores = tensor("out.bias").values;
  matvec_add(tensor("out.weight"), readout, out.scores);
  out.attention = std::move(energy);
  return out;
}

}  // namespace simulst
