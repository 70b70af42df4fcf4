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

#ifndef DBN_CSV_HPP_
#define DBN_CSV_HPP_

#include <string>
#include <string_view>

namespace dbn {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Writes text to path, throwing ParseError on I/O failure.
void write_text_file(const std::string& path, std::string_view text);

}  // namespace dbn

#endif  // DBN_CSV_HPP_
