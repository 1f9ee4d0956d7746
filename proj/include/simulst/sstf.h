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

// SSTF feature files: "SSTF", u32 T, u32 D, T*D f32 row-major, f64 frame_ms.
// All integers and floats little-endian.

#pragma once

#include <filesystem>
#include <iosfwd>

#include "simulst/types.h"

namespace simulst {

void write_features(std::ostream& out, const AudioFeatures& features);
AudioFeatures read_features(std::istream& in);

void save_features(const std::filesystem::path& path, const AudioFeatures& features);
AudioFeatures load_features(const std::filesystem::path& path);

}  // namespace simulst
