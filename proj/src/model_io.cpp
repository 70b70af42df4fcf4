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

#include "dbn/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "dbn/error.hpp"
#include "json.hpp"

namespace dbn {

using nlohmann::json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

json parse_document(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << what << " line " << line_of_offset(text, e.byte) << ": " << e.what();
    throw ParseError(msg.str());
  }
}

// Reads a required field, reporting the JSON path on failure.
template <typename T>
T field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError("missing field " + path + "." + key);
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("field " + path + "." + key + " has the wrong type");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("error writing " + path);
}

}  // namespace

std::string model_to_json(const DiscreteDbn& dbn) {
  json doc;
  doc["version"] = kModelFormatVersion;
  json nodes = json::array();
  for (const NodeSpec& n : dbn.nodes()) {
    nodes.push_back({{"name", n.name},
                     {"arity", n.arity},
                     {"kind", n.kind == NodeKind::kHidden ? "hidden" : "observed"}});
  }
  doc["nodes"] = std::move(nodes);
  auto edges = [&](const std::vector<Edge>& list) {
    json out = json::array();
    for (const Edge& e : list) out.push_back({dbn.node(e.parent).name, dbn.node(e.child).name});
    return out;
  };
  doc["intra_edges"] = edges(dbn.intra_edges());
  doc["inter_edges"] = edges(dbn.inter_edges());
  json cpts = json::array();
  for (int i = 0; i < dbn.num_nodes(); ++i) {
    for (CptRole role : {CptRole::kPrior, CptRole::kTransition}) {
      const NodeCpt& cpt = dbn.cpt(i, role);
      json order = json::array();
      for (const ParentRef& p : cpt.parents) order.push_back({{"node", dbn.node(p.node).name}, {"lag", p.lag}});
      cpts.push_back({{"node", dbn.node(i).name},
                      {"role", role == CptRole::kPrior ? "prior" : "transition"},
                      {"parent_order", std::move(order)},
                      {"values", cpt.table.values()}});
    }
  }
  doc["cpts"] = std::move(cpts);
  return doc.dump(1) + "\n";
}

DiscreteDbn model_from_json(const std::string& text) {
  const json doc = parse_document(text, "model");
  if (!doc.is_object()) throw ParseError("model document must be a JSON object");
  if (!doc.contains("version")) {
    throw ParseError(std::string("model has no version tag; supported versions: ") + kSupportedModelVersions);
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kModelFormatVersion) {
    throw ParseError("unsupported model version " + doc["version"].dump() +
                     "; supported versions: " + kSupportedModelVersions);
  }

  std::vector<NodeSpec> nodes;
  std::map<std::string, int> index;
  const json node_list = field<json>(doc, "nodes", "$");
  if (!node_list.is_array()) throw ParseError("field $.nodes must be an array");
  for (std::size_t i = 0; i < node_list.size(); ++i) {
    const std::string path = "$.nodes[" + std::to_string(i) + "]";
    NodeSpec spec;
    spec.name = field<std::string>(node_list[i], "name", path);
    spec.arity = field<int>(node_list[i], "arity", path);
    const std::string kind = field<std::string>(node_list[i], "kind", path);
    if (kind == "hidden") {
      spec.kind = NodeKind::kHidden;
    } else if (kind == "observed") {
      spec.kind = NodeKind::kObserved;
    } else {
      throw ParseError(path + ".kind must be \"hidden\" or \"observed\", got \"" + kind + "\"");
    }
    if (!index.emplace(spec.name, static_cast<int>(i)).second) {
      throw ParseError(path + ".name duplicates " + spec.name);
    }
    nodes.push_back(std::move(spec));
  }
  auto lookup = [&](const std::string& name, const std::string& path) {
    auto it = index.find(name);
    if (it == index.end()) throw ParseError(path + " names unknown node \"" + name + "\"");
    return it->second;
  };
  auto read_edges = [&](const char* key) {
    std::vector<Edge> out;
    const json list = field<json>(doc, key, "$");
    if (!list.is_array()) throw ParseError(std::string("field $.") + key + " must be an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string path = std::string("$.") + key + "[" + std::to_string(k) + "]";
      if (!list[k].is_array() || list[k].size() != 2 || !list[k][0].is_string() || !list[k][1].is_string()) {
        throw ParseError(path + " must be a [parent, child] pair of node names");
      }
      out.push_back({lookup(list[k][0].get<std::string>(), path), lookup(list[k][1].get<std::string>(), path)});
    }
    return out;
  };
  std::vector<Edge> intra = read_edges("intra_edges");
  std::vector<Edge> inter = read_edges("inter_edges");

  std::vector<NodeCpt> prior(nodes.size());
  std::vector<NodeCpt> transition(nodes.size());
  std::vector<int> seen(nodes.size() * 2, 0);
  const json cpt_list = field<json>(doc, "cpts", "$");
  if (!cpt_list.is_array()) throw ParseError("field $.cpts must be an array");
  for (std::size_t k = 0; k < cpt_list.size(); ++k) {
    const std::string path = "$.cpts[" + std::to_string(k) + "]";
    const json& entry = cpt_list[k];
    const int node = lookup(field<std::string>(entry, "node", path), path + ".node");
    const std::string role = field<std::string>(entry, "role", path);
    if (role != "prior" && role != "transition") {
      throw ParseError(path + ".role must be \"prior\" or \"transition\"");
    }
    const bool is_prior = role == "prior";
    if (seen[node * 2 + (is_prior ? 0 : 1)]++) {
      throw ParseError(path + " is a second " + role + " CPT for " + nodes[node].name);
    }
    NodeCpt cpt;
    std::vector<int> parent_arities;
    const json order = field<json>(entry, "parent_order", path);
    if (!order.is_array()) throw ParseError(path + ".parent_order must be an array");
    for (std::size_t p = 0; p < order.size(); ++p) {
      const std::string ppath = path + ".parent_order[" + std::to_string(p) + "]";
      ParentRef ref;
      ref.node = lookup(field<std::string>(order[p], "node", ppath), ppath + ".node");
      ref.lag = field<int>(order[p], "lag", ppath);
      if (ref.lag != 0 && ref.lag != 1) throw ParseError(ppath + ".lag must be 0 or 1");
      cpt.parents.push_back(ref);
      parent_arities.push_back(nodes[ref.node].arity);
    }
    std::vector<double> values;
    try {
      values = entry.at("values").get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ParseError(path + ".values must be an array of numbers");
    }
    std::size_t rows = 1;
    for (int a : parent_arities) rows *= a;
    if (values.size() != rows * nodes[node].arity) {
      std::ostringstream msg;
      msg << path << ".values has " << values.size() << " entries; arities require "
          << rows * nodes[node].arity << " (" << rows << " rows x " << nodes[node].arity << ")";
      throw ParseError(msg.str());
    }
    try {
      cpt.table = ConditionalTable(nodes[node].arity, std::move(parent_arities), std::move(values));
      cpt.table.check_stochastic();
    } catch (const InvalidArgument& e) {
      throw ParseError(path + " (" + nodes[node].name + ", " + role + "): " + e.what());
    }
    (is_prior ? prior : transition)[node] = std::move(cpt);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!seen[i * 2] || !seen[i * 2 + 1]) {
      throw ParseError("node " + nodes[i].name + " is missing its " +
                       (seen[i * 2] ? "transition" : "prior") + " CPT");
    }
  }
  try {
    return DiscreteDbn(std::move(nodes), std::move(intra), std::move(inter), std::move(prior),
                       std::move(transition));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid model: ") + e.what());
  }
}

void save_model(const DiscreteDbn& dbn, const std::string& path) { write_file(path, model_to_json(dbn)); }

DiscreteDbn load_model(const std::string& path) {
  try {
    return model_from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string evidence_to_json(const DiscreteDbn& dbn, const EvidenceSequence& evidence) {
  json doc;
  doc["horizon"] = evidence.horizon();
  json obs = json::array();
  for (int t = 0; t < evidence.horizon(); ++t) {
    for (int i = 0; i < evidence.num_nodes(); ++i) {
      const int v = evidence.value(t, i);
      if (v != kMissing) obs.push_back({t + 1, dbn.node(i).name, v});
    }
  }
  doc["observations"] = std::move(obs);
  return doc.dump() + "\n";
}

EvidenceSequence evidence_from_json(const DiscreteDbn& dbn, const std::string& text) {
  const json doc = parse_document(text, "evidence");
  const int horizon = field<int>(doc, "horizon", "$");
  if (horizon < 1) throw ParseError("$.horizon must be >= 1");
  std::map<std::string, int> index;
  for (int i = 0; i < dbn.num_nodes(); ++i) index[dbn.node(i).name] = i;
  EvidenceSequence evidence(horizon, dbn.num_nodes());
  const json obs = field<json>(doc, "observations", "$");
  if (!obs.is_array()) throw ParseError("$.observations must be an array");
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const std::string path = "$.observations[" + std::to_string(k) + "]";
    const json& o = obs[k];
    if (!o.is_array() || o.size() != 3 || !o[0].is_number_integer() || !o[1].is_string() ||
        !o[2].is_number_integer()) {
      throw ParseError(path + " must be a [t, node, value] triple");
    }
    const int t = o[0].get<int>();
    if (t < 1 || t > horizon) throw ParseError(path + " has t outside 1.." + std::to_string(horizon));
    auto it = index.find(o[1].get<std::string>());
    if (it == index.end()) throw ParseError(path + " names unknown node " + o[1].dump());
    evidence.set(t - 1, it->second, o[2].get<int>());
  }
  try {
    evidence.check(dbn);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid evidence: ") + e.what());
  }
  return evidence;
}

void save_evidence(const DiscreteDbn& dbn, const EvidenceSequence& evidence, const std::string& path) {
  write_file(path, evidence_to_json(dbn, evidence));
}

EvidenceSequence load_evidence(const DiscreteDbn& dbn, const std::string& path) {
  try {
    return evidence_from_json(dbn, read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace dbn
