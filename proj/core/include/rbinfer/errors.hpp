// Copyright 2026 The rbinfer Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbinfer {

/// Machine-readable failure categories. The CLI maps these to exit codes.
enum class ErrorCategory {
  config,                // malformed or inconsistent configuration
  domain,                // argument outside an operation's domain
  sampling,              // rejection sampling failed to accept
  singular_likelihood,   // score/information requested where Pr in {0,1}
  degenerate_posterior,  // all particle weights vanished
  support_collision,     // resampler could not stay inside the support
  underdetermined,       // fit with too few distinct sequence lengths
  ratio_undefined,       // interleaved ratio with zero reference decay
  divergence,            // analytic expression diverges at the given input
  construction,          // invalid channel or gate-set construction
  io,                    // file or format failure
};

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(to_string(category)) + ": " + message),
        category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace rbinfer
