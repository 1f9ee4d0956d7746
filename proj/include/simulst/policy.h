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

#include "simulst/types.h"

namespace simulst {

// Deterministic read schedule for one utterance of src_len frames.
struct Schedule {
  PolicyConfig policy;
  std::size_t src_len = 1;

  Schedule(PolicyConfig p, std::size_t src_len);

  // g(t) = min(k + (t-1)s, src_len). Throws ArgumentError for t < 1.
  std::size_t frames_at_step(std::size_t t) const;

  // The cut-off step: smallest t with g(t) == src_len.
  std::size_t cutoff_step() const;
};

}  // namespace simulst
