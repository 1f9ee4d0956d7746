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

#include "simulst/policy.h"

#include <algorithm>
#include <string>

#include "simulst/error.h"

namespace simulst {

Schedule::Schedule(PolicyConfig p, std::size_t len) : policy(p), src_len(len) {
  policy.validate();
  if (src_len < 1) throw ArgumentError("schedule: source length must be >= 1");
}

std::size_t Schedule::frames_at_step(std::size_t t) const {
  if (t < 1) throw ArgumentError("schedule: step index is 1-based, got 0");
  // Saturate before multiplying so huge t cannot overflow.
  if (policy.k >= src_len) return src_len;
  const std::size_t remaining = src_len - policy.k;
  if (t - 1 >= remaining / policy.s + 1) return src_len;
  return std::min(policy.k + (t - 1) * policy.s, src_len);
}

std::size_t Schedule::cutoff_step() const {
  if (policy.k >= src_len) return 1;
  const std::size_t remaining = src_len - policy.k;
  return 1 + (remaining + policy.s - 1) / policy.s;
}

}  // namespace simulst
