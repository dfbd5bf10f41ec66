// Copyright 2026 The DLSC Authors
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

#ifndef DLSC_ERRORS_HPP
#define DLSC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dlsc {

/// Error categories. The numeric values double as CLI exit codes and must
/// stay stable (they are documented in the README).
enum class ErrorCode : int {
  kIo = 3,                   // filesystem failures (open/read/write/rename)
  kParse = 4,                // malformed input files
  kConstraintViolation = 5,  // violated method constraints (e.g. V_r >= K_l)
  kInvalidArgument = 6,      // out-of-domain parameters or type invariants
  kDimensionMismatch = 7,    // incompatible matrix shapes
  kDegenerateInput = 8,      // zero-variance series, all-zero atoms, ...
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Copy with "<context>: " prepended to the message; used to name the
  /// pipeline stage an error escaped from.
  Error with_context(const std::string& context) const {
    return Error(code_, context + ": " + what());
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConstraintViolation: return "constraint";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
  }
  return "unknown";
}

}  // namespace dlsc

#endif  // DLSC_ERRORS_HPP
