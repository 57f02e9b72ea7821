/*
 * Copyright 2026 The Paxconnect Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PAXCONNECT_ERRORS_H_
#define PAXCONNECT_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace paxconnect {

// Base class of every error raised by the library. The concrete type tells
// the caller which contract was violated.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration (out-of-range parameter, bad enum).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input does not match the expected schema (missing column or feature).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Operation called on an object in the wrong state (e.g. encode before fit).
class StateError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized content.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Serialized content written by an incompatible format version.
class VersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Data that cannot be processed (single-class training set, too few rows).
class DataError : public Error {
 public:
  using Error::Error;
};

// A pipeline step failed. what() names the step and the underlying error.
class StepError : public Error {
 public:
  StepError(std::string step, const std::string& message)
      : Error("step '" + step + "': " + message), step_(std::move(step)) {}

  const std::string& step() const { return step_; }

 private:
  std::string step_;
};

}  // namespace paxconnect

#endif  // PAXCONNECT_ERRORS_H_
