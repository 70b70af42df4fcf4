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

#ifndef DBN_MODEL_IO_HPP_
#define DBN_MODEL_IO_HPP_

#include <string>

#include "dbn/model.hpp"

namespace dbn {

// Model file format version written by save_model; load_model accepts only
// the versions listed in kSupportedModelVersions.
inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kSupportedModelVersions = "1";

// JSON text <-> model. Doubles are written in shortest round-trip form, so
// model_from_json(model_to_json(m)) == m exactly.
std::string model_to_json(const DiscreteDbn& dbn);
DiscreteDbn model_from_json(const std::string& text);

void save_model(const DiscreteDbn& dbn, const std::string& path);
DiscreteDbn load_model(const std::string& path);

// Evidence: {"horizon": T, "observations": [[t, "node", value], ...]} with t
// 1-based.
std::string evidence_to_json(const DiscreteDbn& dbn, const EvidenceSequence& evidence);
EvidenceSequence evidence_from_json(const DiscreteDbn& dbn, const std::string& text);

void save_evidence(const DiscreteDbn& dbn, const EvidenceSequence& evidence, const std::string& path);
EvidenceSequence load_evidence(const DiscreteDbn& dbn, const std::string& path);

}  // namespace dbn

#endif  // DBN_MODEL_IO_HPP_
