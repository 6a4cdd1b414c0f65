// Copyright 2026 The privmdp Authors
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

#ifndef PRIVMDP_ERROR_H_
#define PRIVMDP_ERROR_H_

#include <stdexcept>
#include <string>

namespace privmdp {

// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kInvalidArgument,  // a caller-supplied parameter is out of range
  kConfig,           // malformed or incomplete run configuration
  kData,             // input data violates its schema or invariants
  kNumerical,        // a computation produced an inconsistent result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowInvalidArgument(const std::string& message) {
  throw Error(ErrorKind::kInvalidArgument, message);
}
[[noreturn]] inline void ThrowConfigError(const std::string& message) {
  throw Error(ErrorKind::kConfig, message);
}
[[noreturn]] inline void ThrowDataError(const std::string& message) {
  throw Error(ErrorKind::kData, message);
}
[[noreturn]] inline void ThrowNumericalError(const std::string& message) {
  throw Error(ErrorKind::kNumerical, message);
}

}  // namespace privmdp

#endif  // PRIVMDP_ERROR_H_
