// Copyright 2026 The dbnsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DBN_ERROR_HPP_
#define DBN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dbn {

// Malformed model, evidence or configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file that could not be read or parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state-space or table size exceeded a configured cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The evidence has probability zero under the model.
class ZeroProbabilityEvidence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dbn

#endif  // DBN_ERROR_HPP_
