#include "lpg/augmentation.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <sstream>

#include "lpg/errors.hpp"
#include "lpg/prompts.hpp"

namespace lpg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

std::string normalize_state(std::string s) {
  if (s == "turned_on") return "on";
  if (s == "turned_off") return "off";
  return s;
}

std::vector<std::string> decode_states(const json& v) {
  std::vector<std::string> out;
  auto push = [&](const std::string& s) {
    if (!s.empty()) out.push_back(normalize_state(s));
  };
  if (v.is_null()) return out;
  if (v.is_string()) {
    // A single string, possibly comma separated.
    std::istringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      size_t a = item.find_first_not_of(" \t");
      size_t b = item.find_last_not_of(" \t");
      if (a != std::string::npos) push(item.substr(a, b - a + 1));
    }
    return out;
  }
  if (v.is_array()) {
    for (const auto& e : v)
      if (e.is_string()) push(e.get<std::string>());
    return out;
  }
  throw ParseError("states must be a string or an array");
}

// Model output sometimes drops the quotes around relation tokens (the
// documented example itself does); repair just those before JSON parsing.
std::string repair_response(std::string text) {
  static const std::regex bare_relation(
      R"(("relation"\s*:\s*)(ontop_of|inside_of|ontop|inside))");
  return std::regex_replace(text, bare_relation, "$1\"$2\"");
}

// Smallest index making (category, index) unused.
NodeId fresh_id(const std::string& category, const std::set<NodeId>& used) {
  for (int i = 1;; ++i) {
    NodeId candidate(category, i);
    if (!used.count(candidate)) return candidate;
  }
}

}  // namespace

std::string render_descriptor_prompt(const Observation& obs) {
  std::string priors_section;
  if (!obs.priors.empty()) {
    std::vector<std::string> names;
    for (const auto& id : obs.priors) names.push_back(id.text());
    priors_section = "Previously, the following objects were spotted: " + join(names) +
                     ". These objects can now be removed or new ones added — please "
                     "proceed carefully.";
  }
  return render_template(load_prompt("vlm_descriptor.txt"),
                         {{"ASSET", obs.asset.text()},
                          {"OBJ_NAMES", join(obs.known_names)},
                          {"PRIORS_SECTION", priors_section}});
}

std::string render_parser_prompt(const Observation& obs, const std::string& description) {
  return render_template(load_prompt("vlm_parser.txt"),
                         {{"ASSET", obs.asset.text()},
                          {"OBJ_NAMES", join(obs.known_names)},
                          {"DESCRIPTION", description}});
}

std::string describe_stage(LmClient& lm, const Observation& obs) {
  if (obs.image_base64.empty())
    throw ConfigError("describe_stage needs a camera frame (live mode only)");
  ChatRequest req;
  ChatMessage msg{"user", render_descriptor_prompt(obs), {obs.image_base64}};
  req.messages.push_back(std::move(msg));
  return lm.complete(req, CallTag::augmentation).text;
}

ParseOutcome parse_subgraph_response(const std::string& text, const Observation& obs,
                                     const std::set<NodeId>& existing_ids) {
  json doc;
  std::string repaired = repair_response(text);
  try {
    doc = json::parse(repaired);
  } catch (const json::parse_error&) {
    // The array may be embedded in prose.
    size_t open = repaired.find('[');
    size_t close = repaired.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw ParseError("response contains no JSON array");
    try {
      doc = json::parse(repaired.substr(open, close - open + 1));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed subgraph JSON: ") + e.what());
    }
  }
  if (!doc.is_array()) throw ParseError("subgraph response must be a JSON array");

  std::set<NodeId> priors(obs.priors.begin(), obs.priors.end());
  std::set<NodeId> used = existing_ids;
  std::map<NodeId, NodeId> renamed;  // original response name -> assigned id

  ParseOutcome out;
  for (size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    auto reject = [&](const std::string& why) {
      out.rejected.push_back("entry " + std::to_string(i) + ": " + why);
    };
    if (!e.is_object()) {
      reject("not a JSON object");
      continue;
    }
    if (!e.contains("name") || !e["name"].is_string()) {
      reject("missing name");
      continue;
    }

    AugEntry entry;
    std::string raw_name = e["name"].get<std::string>();
    std::optional<NodeId> original;
    try {
      NodeId id = NodeId::parse(raw_name);
      original = id;
      // A name already taken by a node that cannot be re-sighted here gets
      // a fresh instance index.
      if (existing_ids.count(id) && !priors.count(id))
        entry.name = fresh_id(id.category, used);
      else if (used.count(id) && !priors.count(id))
        entry.name = fresh_id(id.category, used);
      else
        entry.name = id;
    } catch (const IdError&) {
      // Bare category name: assign the smallest free index.
      std::string category = raw_name;
      std::transform(category.begin(), category.end(), category.begin(), ::tolower);
      bool valid = !category.empty();
      for (char c : category)
        valid = valid && ((c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9'));
      if (!valid) {
        reject("unusable name '" + raw_name + "'");
        continue;
      }
      entry.name = fresh_id(category, used);
    }
    if (original && *original != entry.name) renamed[*original] = entry.name;

    bool null_relation = !e.contains("relation") || e["relation"].is_null() ||
                         (e["relation"].is_string() && e["relation"].get<std::string>().empty());
    bool null_parent = !e.contains("related_to") || e["related_to"].is_null() ||
                       (e["related_to"].is_string() &&
                        e["related_to"].get<std::string>().empty());
    if (null_relation || null_parent) {
      // Unanchored detection: the weakest consistent placement is on the
      // inspected asset.
      entry.relation = Relation::ontop_of;
      entry.related_to = obs.asset;
    } else {
      if (!e["relation"].is_string()) {
        reject("relation must be a string or null");
        continue;
      }
      auto rel = relation_from_string(e["relation"].get<std::string>());
      if (!rel || (*rel != Relation::ontop_of && *rel != Relation::inside_of)) {
        reject("unknown relation '" + e["relation"].get<std::string>() + "'");
        continue;
      }
      entry.relation = *rel;
      if (!e["related_to"].is_string()) {
        reject("related_to must be a string or null");
        continue;
      }
      NodeId parent;
      try {
        parent = NodeId::parse(e["related_to"].get<std::string>());
      } catch (const IdError&) {
        reject("unusable related_to '" + e["related_to"].get<std::string>() + "'");
        continue;
      }
      if (auto it = renamed.find(parent); it != renamed.end()) parent = it->second;
      bool among_entries = std::any_of(out.subgraph.entries.begin(),
                                       out.subgraph.entries.end(),
                                       [&](const AugEntry& a) { return a.name == parent; });
      if (parent != obs.asset && !among_entries && !existing_ids.count(parent)) {
        reject("related_to '" + parent.text() + "' is not a known node");
        continue;
      }
      entry.related_to = parent;
    }

    try {
      entry.states = decode_states(e.contains("states") ? e["states"] : json());
    } catch (const ParseError& err) {
      reject(err.what());
      continue;
    }

    used.insert(entry.name);
    out.subgraph.entries.push_back(std::move(entry));
  }
  return out;
}

ParseOutcome parse_stage(LmClient& lm, const std::string& description,
                         const Observation& obs, const std::set<NodeId>& existing_ids) {
  ChatRequest req;
  req.messages.push_back({"user", render_parser_prompt(obs, description), {}});
  ChatResponse resp = lm.complete(req, CallTag::augmentation);
  return parse_subgraph_response(resp.text, obs, existing_ids);
}

AugmentedSubgraph oracle_reveal(const SceneGraph& truth, const NodeId& asset) {
  if (!truth.is_asset(asset) && !truth.is_object(asset))
    throw UnknownNodeError("unknown asset: " + asset.text());
  AugmentedSubgraph out;
  for (const NodeId& d : truth.descendants(asset)) {
    auto it = truth.objects.find(d);
    if (it == truth.objects.end()) continue;
    const ObjectNode& o = it->second;
    out.entries.push_back({o.id, o.relation, o.parent, o.states});
  }
  return out;
}

namespace {

std::map<std::string, long> node_multiset(const AugmentedSubgraph& sg) {
  std::map<std::string, long> out;
  for (const auto& e : sg.entries) ++out[e.name.category];
  return out;
}

std::map<std::string, long> edge_multiset(const AugmentedSubgraph& sg) {
  std::map<std::string, long> out;
  for (const auto& e : sg.entries) {
    Relation rel = e.relation.value_or(Relation::ontop_of);
    std::string parent = e.related_to ? e.related_to->category : "";
    ++out[e.name.category + "|" + relation_name(rel) + "|" + parent];
  }
  return out;
}

double f1_of(const std::map<std::string, long>& pred,
             const std::map<std::string, long>& truth) {
  long pred_total = 0, truth_total = 0, overlap = 0;
  for (const auto& [k, n] : pred) pred_total += n;
  for (const auto& [k, n] : truth) truth_total += n;
  for (const auto& [k, n] : pred)
    if (auto it = truth.find(k); it != truth.end()) overlap += std::min(n, it->second);
  if (pred_total == 0 && truth_total == 0) return 1.0;
  if (overlap == 0) return 0.0;
  double precision = double(overlap) / pred_total;
  double recall = double(overlap) / truth_total;
  return 2 * precision * recall / (precision + recall);
}

}  // namespace

F1Result score_f1(const AugmentedSubgraph& predicted, const AugmentedSubgraph& truth) {
  F1Result r;
  r.f1_nodes = f1_of(node_multiset(predicted), node_multiset(truth));
  r.f1_edges = f1_of(edge_multiset(predicted), edge_multiset(truth));
  r.exact = r.f1_nodes == 1.0 && r.f1_edges == 1.0;
  return r;
}

std::vector<ObservedObject> to_observed(const AugmentedSubgraph& sg, const NodeId& asset) {
  std::vector<ObservedObject> out;
  for (const auto& e : sg.entries)
    out.push_back({e.name, e.relation.value_or(Relation::ontop_of),
                   e.related_to.value_or(asset), e.states, {}});
  return out;
}

AugmentedSubgraph subgraph_from_json(const json& doc) {
  if (!doc.is_array()) throw ParseError("subgraph document must be a JSON array");
  AugmentedSubgraph out;
  for (const auto& e : doc) {
    if (!e.is_object()) throw ParseError("subgraph entry must be a JSON object");
    AugEntry entry;
    entry.name = NodeId::parse(e.at("name").get<std::string>());
    if (e.contains("relation") && e["relation"].is_string() &&
        !e["relation"].get<std::string>().empty()) {
      auto rel = relation_from_string(e["relation"].get<std::string>());
      if (!rel) throw ParseError("unknown relation '" + e["relation"].get<std::string>() + "'");
      entry.relation = *rel;
    }
    if (e.contains("related_to") && e["related_to"].is_string() &&
        !e["related_to"].get<std::string>().empty())
      entry.related_to = NodeId::parse(e["related_to"].get<std::string>());
    entry.states = decode_states(e.contains("states") ? e["states"] : json());
    out.entries.push_back(std::move(entry));
  }
  return out;
}

ordered_json subgraph_to_json(const AugmentedSubgraph& sg) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : sg.entries) {
    ordered_json entry{{"name", e.name.text()}};
    entry["relation"] = e.relation ? ordered_json(relation_name(*e.relation)) : ordered_json();
    entry["related_to"] = e.related_to ? ordered_json(e.related_to->text()) : ordered_json();
    entry["states"] = e.states;
    arr.push_back(entry);
  }
  return arr;
}

}  // namespace lpg
