// Copyright 2026 The CertSmooth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef CERTSMOOTH_ERROR_H_
#define CERTSMOOTH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace certsmooth {

enum class ErrorCode {
  kInvalidArgument,
  kDomainError,
  kUnsupported,
  kProtocol,  // malformed or inconsistent external files
  kIo,
  kNoFeasiblePoint,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. Statistical
// failure (an inconclusive test) is never an error; it is an ABSTAIN.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kDomainError:
      return "domain error";
    case ErrorCode::kUnsupported:
      return "unsupported";
    case ErrorCode::kProtocol:
      return "protocol error";
    case ErrorCode::kIo:
      return "i/o error";
    case ErrorCode::kNoFeasiblePoint:
      return "no feasible grid point";
  }
  return "unknown";
}

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace certsmooth

#endif  // CERTSMOOTH_ERROR_H_
