// Copyright 2026 The TAP Authors.
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

#ifndef TAP_ERROR_H_
#define TAP_ERROR_H_

#include <stdexcept>
#include <string>

namespace tap {

// Error categories. The numeric values are part of the C API contract
// (see include/tap/tap.h) and must not be renumbered.
enum class ErrorCode {
  kInvalidArgument = 1,
  kParse = 2,
  kIo = 3,
  kDiverged = 4,
  kRuntime = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error InvalidArgument(const std::string &message) {
  return Error(ErrorCode::kInvalidArgument, message);
}
inline Error ParseError(const std::string &message) {
  return Error(ErrorCode::kParse, message);
}
inline Error IoError(const std::string &message) {
  return Error(ErrorCode::kIo, message);
}

}  // namespace tap

#endif  // TAP_ERROR_H_
