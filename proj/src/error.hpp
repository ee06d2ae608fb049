// Copyright 2026 The s2lc Authors. All Rights Reserved.
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

namespace s2lc {

enum class ErrorCode {
  kShape,      // tensor or weight dimensions disagree
  kConfig,     // invalid configuration (slice counts, profiles, presets)
  kFormat,     // malformed archive, container or image file
  kTruncated,  // input ended before the declared content
  kChecksum,   // stream was produced with different weights
  kContract,   // violated numeric precondition (sigma floor, tau floor)
  kDomain,     // metric undefined for the given inputs
  kIo,         // file system failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace s2lc
