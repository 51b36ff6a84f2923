#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lpg/gateway.hpp"
#include "lpg/memory_graph.hpp"
#include "lpg/scene_graph.hpp"

namespace lpg {

// One inspection of an asset: either a camera frame (live mode) or a handle
// to the ground-truth graph (dataset mode), plus the naming context the
// prompts need.
struct Observation {
  const SceneGraph* truth = nullptr;  // dataset mode
  std::string image_base64;           // live mode
  NodeId asset;
  std::vector<std::string> known_names;  // category vocabulary for the prompts
  std::vector<NodeId> priors;            // objects previously believed under the asset
};

struct AugEntry {
  NodeId name;
  std::optional<Relation> relation;  // absent: unanchored detection
  std::optional<NodeId> related_to;
  std::vector<std::string> states;

  bool operator==(const AugEntry&) const = default;
};

struct AugmentedSubgraph {
  std::vector<AugEntry> entries;
  bool operator==(const AugmentedSubgraph&) const = default;
};

// Prompt renderers, exposed for golden-file tests.
std::string render_descriptor_prompt(const Observation& obs);
std::string render_parser_prompt(const Observation& obs, const std::string& description);

// Stage 1: free-text description of the frame.
std::string describe_stage(LmClient& lm, const Observation& obs);

struct ParseOutcome {
  AugmentedSubgraph subgraph;
  std::vector<std::string> rejected;  // per-entry errors, entry-level recovery
};

// Pure response parser: tolerates the loosely quoted relation tokens seen in
// model output, normalizes relations/states, anchors null-relation entries
// to the inspected asset, and re-indexes names colliding with graph ids
// that are not re-observable under this asset.
ParseOutcome parse_subgraph_response(const std::string& text, const Observation& obs,
                                     const std::set<NodeId>& existing_ids);

// Stage 2: prompt the parser model with the description, then decode.
ParseOutcome parse_stage(LmClient& lm, const std::string& description,
                         const Observation& obs, const std::set<NodeId>& existing_ids);

// Dataset mode: the true contents under the asset, nested objects included.
AugmentedSubgraph oracle_reveal(const SceneGraph& truth, const NodeId& asset);

struct F1Result {
  double f1_nodes = 0;
  double f1_edges = 0;
  bool exact = false;
};

// Category-multiset F1 over nodes and (child category, relation, parent
// category) edges; 0/0 counts as 1.
F1Result score_f1(const AugmentedSubgraph& predicted, const AugmentedSubgraph& truth);

// Adapter into MemoryGraph::apply_discovery. Unanchored entries land on the
// asset as ontop_of.
std::vector<ObservedObject> to_observed(const AugmentedSubgraph& sg, const NodeId& asset);

// Serialization for the augscore CLI: the documented JSON array shape.
AugmentedSubgraph subgraph_from_json(const nlohmann::json& doc);
nlohmann::ordered_json subgraph_to_json(const AugmentedSubgraph& sg);

}  // namespace lpg
