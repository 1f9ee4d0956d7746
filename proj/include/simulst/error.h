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

#include <stdexcept>
#include <string>

namespace simulst {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller passed an argument outside the operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Model, features, and engine settings do not fit together.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A decoder state does not match the model that received it.
class StateError : public Error {
 public:
  using Error::Error;
};

// A file or message could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Text contains a symbol the vocabulary does not cover.
class UnknownTokenError : public Error {
 public:
  using Error::Error;
};

// A latency or quality metric is undefined for the given input.
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace simulst
