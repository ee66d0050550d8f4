// Copyright 2026 The BLISS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BLISS_ERROR_HPP_
#define BLISS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bliss {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument values (counts, ranges, empty inputs).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A dataset, model or assignment violates a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; the message names the line or record.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Operation called before its precondition holds (e.g. UCB before the
// initialization sweep finished).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A reward function produced a value outside [0,1].
class RewardRangeError : public Error {
 public:
  using Error::Error;
};

// Rewards or labels missing for some instance of a super arm.
class CompletenessError : public Error {
 public:
  using Error::Error;
};

// Weak-label kind does not match the requested regime.
class RegimeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Metrics requested on data without ground truth.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised inside the inference loop with fold/round context.
class InferenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace bliss

#endif  // BLISS_ERROR_HPP_
