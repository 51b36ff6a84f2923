#pragma once

#include <set>
#include <string>
#include <vector>

#include "lpg/action.hpp"
#include "lpg/scene_graph.hpp"

namespace lpg {

// One object sighting reported by a discovery pass.
struct ObservedObject {
  NodeId id;
  Relation relation = Relation::ontop_of;
  NodeId parent;
  std::vector<std::string> states;
  std::vector<std::string> affordances;  // used only when the node is new
};

struct HistoryEntry {
  std::string reason;
  std::string action_text;
};

struct PromptViewOptions {
  bool json_graph = false;  // serialize the filtered view as JSON
  bool full_graph = false;  // bypass room-scoped filtering
};

// Agent-side overlay on the scene graph: the believed world state plus
// seen/unseen bookkeeping, discovery log, and interaction history.
class MemoryGraph {
 public:
  SceneGraph world;
  std::set<NodeId> seen;
  std::set<NodeId> unseen;
  std::set<NodeId> discovered_assets;
  std::set<NodeId> interacted;
  std::vector<HistoryEntry> history;

  static MemoryGraph init(const SceneGraph& g);

  // Discovery of `asset`: unseen priors under it are dropped, observed
  // objects are inserted (or moved) and marked seen, the asset is logged
  // as discovered. Objects elsewhere in the graph are untouched.
  void apply_discovery(const NodeId& asset, const std::vector<ObservedObject>& observed);

  // Natural-language (or JSON, per options) serialization of the
  // room-scoped view for the planning prompt.
  std::string prompt_view(const PromptViewOptions& opts = {}) const;

  void record_step(const std::string& reason, const Action& a);

  // Debug snapshot.
  std::string dump_json() const;
};

}  // namespace lpg
