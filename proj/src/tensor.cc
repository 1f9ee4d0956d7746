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

#include "simulst/tensor.h"

#include <array>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "le_io.h"
#include "simulst/error.h"

namespace simulst {

namespace {
constexpr std::array<char, 4> kMagic = {'S', 'S', 'T', 'M'};
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxNameLength = 4096;
}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
  values.assign(numel(), 0.0f);
}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<float> data)
    : shape(std::move(dims)), values(std::move(data)) {
  if (values.size() != numel()) {
    throw ArgumentError("tensor: value count does not match shape");
  }
}

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void write_tensors(std::ostream& out, const TensorMap& tensors) {
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kSstmVersion));
  le::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    if (tensor.values.size() != tensor.numel()) {
      throw ArgumentError("SSTM: tensor '" + name + "' has inconsistent shape");
    }
    le::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    le::put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (auto d : tensor.shape) {
      if (d > std::numeric_limits<std::uint32_t>::max()) {
        throw ArgumentError("SSTM: dimension exceeds 32 bits");
      }
      le::put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (float v : tensor.values) le::put_f32(out, v);
  }
  if (!out) throw IoError("SSTM: write failed");
}

TensorMap read_tensors(std::istream& in) {
  std::array<char, 4> magic{};
  le::read_exact(in, magic.data(), magic.size(), "SSTM magic");
  if (magic != kMagic) throw FormatError("SSTM: bad magic");
  char version = 0;
  le::read_exact(in, &version, 1, "SSTM version");
  if (static_cast<std::uint8_t>(version) != kSstmVersion) {
    throw FormatError("SSTM: unsupported version " +
                      std::to_string(static_cast<unsigned>(static_cast<std::uint8_t>(version))));
  }
  const std::uint32_t count = le::get_u32(in, "SSTM tensor count");
  TensorMap tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = le::get_u32(in, "SSTM name length");
    if (name_len == 0 || name_len > kMaxNameLength) throw FormatError("SSTM: bad name length");
    std::string name(name_len, '\0');
    le::read_exact(in, name.data(), name_len, "SSTM tensor name");
    const std::uint32_t rank = le::get_u32(in, "SSTM rank");
    if (rank > kMaxRank) throw FormatError("SSTM: rank too large for '" + name + "'");
    std::vector<std::size_t> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(le::get_u32(in, "SSTM dims"));
    Tensor tensor(std::move(shape));
    for (auto& v : tensor.values) v = le::get_f32(in, "SSTM values");
    if (!tensors.emplace(name, std::move(tensor)).second) {
      throw FormatError("SSTM: duplicate tensor '" + name + "'");
    }
  }
  return tensors;
}

void save_tensors(const std::filesystem::path& path, const TensorMap& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_tensors(out, tensors);
}

TensorMap load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_tensors(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace simulst
