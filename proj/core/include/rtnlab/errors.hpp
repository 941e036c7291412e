// rtnlab/errors.hpp

// Copyright 2026 The rtnlab Authors
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

#ifndef RTNLAB_ERRORS_HPP_
#define RTNLAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rtnlab {

// Base class for all rtnlab failures. The CLI maps the concrete type to an
// exit code (config 2, data 3, checkpoint 4).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor/matrix shapes. Messages name both shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller passed an argument outside an operation's contract.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration document or field value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent dataset / feature-file contents.
class DataError : public Error {
 public:
  using Error::Error;
};

// A computation produced a non-finite or otherwise unusable value.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad line in an external file; messages carry the line number.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// Unreadable, corrupted, or version-mismatched checkpoint.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace rtnlab

#endif  // RTNLAB_ERRORS_HPP_
