#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpg/ids.hpp"

namespace lpg {

enum class Relation { inside_of, ontop_of, under_of, attached_to };

std::string relation_name(Relation r);        // "inside_of"
std::string relation_short_name(Relation r);  // "inside"
// Accepts both the long ("inside_of") and short ("inside") spellings.
std::optional<Relation> relation_from_string(const std::string& s);

struct RoomNode {
  NodeId id;
  nlohmann::json properties = nlohmann::json::array();
  bool operator==(const RoomNode&) const = default;
};

struct AssetNode {
  NodeId id;
  NodeId room;
  std::vector<std::string> states;
  std::vector<std::string> affordances;
  nlohmann::json properties = nlohmann::json::array();

  bool has_state(const std::string& s) const;
  bool has_affordance(const std::string& a) const;
  bool operator==(const AssetNode&) const = default;
};

struct ObjectNode {
  NodeId id;
  Relation relation = Relation::ontop_of;
  NodeId parent;
  std::vector<std::string> states;
  std::vector<std::string> affordances;
  nlohmann::json properties = nlohmann::json::array();

  bool has_state(const std::string& s) const;
  bool has_affordance(const std::string& a) const;
  bool operator==(const ObjectNode&) const = default;
};

struct AgentNode {
  NodeId id{"agent", 1};
  NodeId location;
  std::optional<NodeId> holding;
  bool operator==(const AgentNode&) const = default;
};

// Four-layer hierarchical world state: an implicit scene root, rooms,
// assets parented to rooms, and objects parented to assets or other
// objects. A held object is detached from the hierarchy and stored on
// the side, which keeps the single-parent invariant unconditional.
class SceneGraph {
 public:
  std::map<NodeId, RoomNode> rooms;
  std::map<NodeId, AssetNode> assets;
  std::map<NodeId, ObjectNode> objects;
  std::optional<ObjectNode> held;  // parent edge suspended while held
  AgentNode agent;

  static SceneGraph parse(const std::string& json_text);
  static SceneGraph from_json(const nlohmann::json& doc);
  std::string serialize() const;
  nlohmann::ordered_json to_json() const;

  bool has_node(const NodeId& id) const;
  bool is_room(const NodeId& id) const { return rooms.count(id) > 0; }
  bool is_asset(const NodeId& id) const { return assets.count(id) > 0; }
  bool is_object(const NodeId& id) const;  // includes a held object

  const ObjectNode* find_object(const NodeId& id) const;  // objects + held
  ObjectNode* find_object(const NodeId& id);

  // Parent in the containment hierarchy; rooms have no parent here.
  std::optional<NodeId> parent_of(const NodeId& id) const;
  // The room a node (transitively) lives in. Held objects have no room.
  std::optional<NodeId> room_of(const NodeId& id) const;
  // Direct children, sorted by id.
  std::vector<NodeId> children_of(const NodeId& id) const;
  // All nodes reachable by child edges, depth-first, children sorted by id.
  std::vector<NodeId> descendants(const NodeId& id) const;

  std::vector<std::string> states_of(const NodeId& id) const;
  std::vector<std::string> affordances_of(const NodeId& id) const;
  bool node_has_state(const NodeId& id, const std::string& s) const;
  bool node_has_affordance(const NodeId& id, const std::string& a) const;

  // Closed containers strictly above `id`, outermost first.
  std::vector<NodeId> closed_ancestors(const NodeId& id) const;

  void add_state(const NodeId& id, const std::string& s);
  void remove_state(const NodeId& id, const std::string& s);

  // Checks all structural invariants, throwing InvariantError on violation.
  void check_invariants() const;

  bool operator==(const SceneGraph&) const = default;
};

// Ids whose (relation, parent) or state set differ between the two graphs;
// the agent is excluded. Throws UniverseMismatchError when the id sets
// differ.
std::set<NodeId> diff_changed_nodes(const SceneGraph& initial, const SceneGraph& goal);

// SHA-256 hex of the canonical serialization.
std::string graph_hash(const SceneGraph& g);

}  // namespace lpg
