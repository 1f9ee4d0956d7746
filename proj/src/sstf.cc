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

#include "simulst/sstf.h"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "le_io.h"
#include "simulst/error.h"

namespace simulst {

namespace {
constexpr std::array<char, 4> kMagic = {'S', 'S', 'T', 'F'};
}  // namespace

void write_features(std::ostream& out, const AudioFeatures& features) {
  if (features.num_frames() > std::numeric_limits<std::uint32_t>::max() ||
      features.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("SSTF: dimensions exceed 32 bits");
  }
  out.write(kMagic.data(), kMagic.size());
  le::put_u32(out, static_cast<std::uint32_t>(features.num_frames()));
  le::put_u32(out, static_cast<std::uint32_t>(features.dim()));
  for (float v : features.values()) le::put_f32(out, v);
  le::put_f64(out, features.frame_ms());
  if (!out) throw IoError("SSTF: write failed");
}

AudioFeatures read_features(std::istream& in) {
  std::array<char, 4> magic{};
  le::read_exact(in, magic.data(), magic.size(), "SSTF magic");
  if (magic != kMagic) throw FormatError("SSTF: bad magic");
  const std::uint32_t frames = le::get_u32(in, "SSTF frame count");
  const std::uint32_t dim = le::get_u32(in, "SSTF dimension");
  if (frames == 0 || dim == 0) throw FormatError("SSTF: empty feature matrix");
  const std::uint64_t count = static_cast<std::uint64_t>(frames) * dim;
  std::vector<float> values;
  values.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) values.push_back(le::get_f32(in, "SSTF values"));
  const double frame_ms = le::get_f64(in, "SSTF frame_ms");
  try {
    return AudioFeatures(std::move(values), frames, dim, frame_ms);
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("SSTF: ") + e.what());
  }
}

void save_features(const std::filesystem::path& path, const AudioFeatures& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_features(out, features);
}

AudioFeatures load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_features(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace simulst
