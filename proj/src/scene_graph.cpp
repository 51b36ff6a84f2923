#include "lpg/scene_graph.hpp"

#include <algorithm>

#include "lpg/errors.hpp"
#include "lpg/hash.hpp"

namespace lpg {

using nlohmann::json;
using nlohmann::ordered_json;

std::string relation_name(Relation r) {
  switch (r) {
    case Relation::inside_of: return "inside_of";
    case Relation::ontop_of: return "ontop_of";
    case Relation::under_of: return "under_of";
    case Relation::attached_to: return "attached_to";
  }
  return "ontop_of";
}

std::string relation_short_name(Relation r) {
  switch (r) {
    case Relation::inside_of: return "inside";
    case Relation::ontop_of: return "ontop";
    case Relation::under_of: return "under";
    case Relation::attached_to: return "attached";
  }
  return "ontop";
}

std::optional<Relation> relation_from_string(const std::string& s) {
  if (s == "inside_of" || s == "inside" || s == "in") return Relation::inside_of;
  if (s == "ontop_of" || s == "ontop" || s == "on top" || s == "on_top") return Relation::ontop_of;
  if (s == "under_of" || s == "under") return Relation::under_of;
  if (s == "attached_to" || s == "attached") return Relation::attached_to;
  return std::nullopt;
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

const json* pick_key(const json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (auto it = obj.find(k); it != obj.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

std::string require_string(const json& obj, std::initializer_list<const char*> keys,
                           const std::string& what) {
  const json* v = pick_key(obj, keys);
  if (!v || !v->is_string()) throw SchemaError("missing required key for " + what);
  return v->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (it->is_string()) {
    if (!it->get<std::string>().empty()) out.push_back(it->get<std::string>());
    return out;
  }
  if (!it->is_array()) throw SchemaError(std::string("expected array for '") + key + "'");
  for (const auto& e : *it) {
    if (!e.is_string()) throw SchemaError(std::string("expected strings in '") + key + "'");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

bool AssetNode::has_state(const std::string& s) const { return contains(states, s); }
bool AssetNode::has_affordance(const std::string& a) const { return contains(affordances, a); }
bool ObjectNode::has_state(const std::string& s) const { return contains(states, s); }
bool ObjectNode::has_affordance(const std::string& a) const { return contains(affordances, a); }

SceneGraph SceneGraph::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  return from_json(doc);
}

SceneGraph SceneGraph::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_object())
    throw SchemaError("document must contain a 'nodes' object");
  const json& nodes = doc["nodes"];

  const json* rooms_arr = pick_key(nodes, {"rooms", "room"});
  if (!rooms_arr || !rooms_arr->is_array()) throw SchemaError("missing 'rooms' array");
  const json* assets_arr = pick_key(nodes, {"asset", "assets"});
  const json* objects_arr = pick_key(nodes, {"objects", "object"});
  const json* agent_val = pick_key(nodes, {"agent"});
  if (!agent_val) throw SchemaError("missing 'agent'");

  SceneGraph g;
  auto seen_id = [&](const NodeId& id) {
    if (g.rooms.count(id) || g.assets.count(id) || g.objects.count(id) ||
        (g.held && g.held->id == id))
      throw InvariantError("duplicate node id: " + id.text());
  };

  for (const auto& r : *rooms_arr) {
    RoomNode room;
    room.id = NodeId::parse(require_string(r, {"name", "id"}, "room"));
    if (auto it = r.find("properties"); it != r.end() && !it->is_null()) room.properties = *it;
    seen_id(room.id);
    g.rooms.emplace(room.id, room);
  }

  if (assets_arr) {
    if (!assets_arr->is_array()) throw SchemaError("'asset' must be an array");
    for (const auto& a : *assets_arr) {
      AssetNode asset;
      asset.id = NodeId::parse(require_string(a, {"name", "id"}, "asset"));
      asset.room = NodeId::parse(require_string(a, {"room", "located"}, "asset room"));
      asset.states = string_list(a, "states");
      asset.affordances = string_list(a, "affordances");
      if (auto it = a.find("properties"); it != a.end() && !it->is_null()) asset.properties = *it;
      seen_id(asset.id);
      g.assets.emplace(asset.id, asset);
    }
  }

  // Agent first so held objects can be matched against `holding`.
  const json& agent_obj =
      agent_val->is_array()
          ? (agent_val->empty() ? throw SchemaError("empty 'agent' array") : (*agent_val)[0])
          : *agent_val;
  g.agent.id = NodeId::parse(require_string(agent_obj, {"name", "id"}, "agent"));
  g.agent.location = NodeId::parse(require_string(agent_obj, {"location"}, "agent location"));
  if (const json* h = pick_key(agent_obj, {"holding"})) {
    std::string held_name = h->get<std::string>();
    if (!held_name.empty() && held_name != "nothing")
      g.agent.holding = NodeId::parse(held_name);
  }

  if (objects_arr) {
    if (!objects_arr->is_array()) throw SchemaError("'objects' must be an array");
    for (const auto& o : *objects_arr) {
      ObjectNode obj;
      obj.id = NodeId::parse(require_string(o, {"name", "id"}, "object"));
      obj.states = string_list(o, "states");
      obj.affordances = string_list(o, "affordances");
      if (auto it = o.find("properties"); it != o.end() && !it->is_null()) obj.properties = *it;
      seen_id(obj.id);
      const json* rel = pick_key(o, {"relation"});
      if (!rel && g.agent.holding && *g.agent.holding == obj.id) {
        g.held = obj;
        continue;
      }
      if (!rel) throw SchemaError("object '" + obj.id.text() + "' missing 'relation'");
      auto r = relation_from_string(rel->get<std::string>());
      if (!r) throw SchemaError("unknown relation for '" + obj.id.text() + "'");
      obj.relation = *r;
      obj.parent = NodeId::parse(require_string(o, {"related_to"}, "object parent"));
      g.objects.emplace(obj.id, obj);
    }
  }

  g.check_invariants();
  return g;
}

ordered_json SceneGraph::to_json() const {
  ordered_json nodes;
  ordered_json rooms_arr = ordered_json::array();
  for (const auto& [id, room] : rooms) {
    ordered_json r{{"name", id.text()}};
    if (!room.properties.empty()) r["properties"] = room.properties;
    rooms_arr.push_back(r);
  }
  nodes["rooms"] = rooms_arr;

  ordered_json assets_arr = ordered_json::array();
  for (const auto& [id, asset] : assets) {
    assets_arr.push_back(ordered_json{{"name", id.text()},
                                      {"room", asset.room.text()},
                                      {"states", asset.states},
                                      {"affordances", asset.affordances},
                                      {"properties", asset.properties}});
  }
  nodes["asset"] = assets_arr;

  ordered_json objects_arr = ordered_json::array();
  auto object_json = [](const ObjectNode& obj, bool is_held) {
    ordered_json o{{"name", obj.id.text()}};
    if (is_held) {
      o["relation"] = nullptr;
      o["related_to"] = nullptr;
    } else {
      o["relation"] = relation_name(obj.relation);
      o["related_to"] = obj.parent.text();
    }
    o["states"] = obj.states;
    o["affordances"] = obj.affordances;
    o["properties"] = obj.properties;
    return o;
  };
  bool held_emitted = false;
  for (const auto& [id, obj] : objects) {
    if (held && !held_emitted && held->id < id) {
      objects_arr.push_back(object_json(*held, true));
      held_emitted = true;
    }
    objects_arr.push_back(object_json(obj, false));
  }
  if (held && !held_emitted) objects_arr.push_back(object_json(*held, true));
  nodes["objects"] = objects_arr;

  nodes["agent"] = ordered_json{{"name", agent.id.text()},
                                {"location", agent.location.text()},
                                {"holding", agent.holding ? agent.holding->text() : "nothing"}};
  return ordered_json{{"nodes", nodes}};
}

std::string SceneGraph::serialize() const { return to_json().dump(2) + "\n"; }

bool SceneGraph::is_object(const NodeId& id) const {
  return objects.count(id) > 0 || (held && held->id == id);
}

bool SceneGraph::has_node(const NodeId& id) const {
  return is_room(id) || is_asset(id) || is_object(id) || id == agent.id;
}

const ObjectNode* SceneGraph::find_object(const NodeId& id) const {
  if (auto it = objects.find(id); it != objects.end()) return &it->second;
  if (held && held->id == id) return &*held;
  return nullptr;
}

ObjectNode* SceneGraph::find_object(const NodeId& id) {
  if (auto it = objects.find(id); it != objects.end()) return &it->second;
  if (held && held->id == id) return &*held;
  return nullptr;
}

std::optional<NodeId> SceneGraph::parent_of(const NodeId& id) const {
  if (auto it = assets.find(id); it != assets.end()) return it->second.room;
  if (auto it = objects.find(id); it != objects.end()) return it->second.parent;
  return std::nullopt;
}

std::optional<NodeId> SceneGraph::room_of(const NodeId& id) const {
  if (is_room(id)) return id;
  if (id == agent.id) return agent.location;
  std::optional<NodeId> cur = id;
  for (size_t guard = 0; cur && guard <= objects.size() + assets.size() + 1; ++guard) {
    if (is_room(*cur)) return cur;
    cur = parent_of(*cur);
  }
  return std::nullopt;
}

std::vector<NodeId> SceneGraph::children_of(const NodeId& id) const {
  std::vector<NodeId> out;
  if (is_room(id)) {
    for (const auto& [aid, asset] : assets)
      if (asset.room == id) out.push_back(aid);
  }
  for (const auto& [oid, obj] : objects)
    if (obj.parent == id) out.push_back(oid);
  return out;  // maps iterate in sorted order
}

std::vector<NodeId> SceneGraph::descendants(const NodeId& id) const {
  if (!has_node(id)) throw UnknownNodeError("unknown node: " + id.text());
  std::vector<NodeId> out;
  std::vector<NodeId> stack = children_of(id);
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    auto kids = children_of(cur);
    std::reverse(kids.begin(), kids.end());
    for (const auto& k : kids) stack.push_back(k);
  }
  return out;
}

std::vector<std::string> SceneGraph::states_of(const NodeId& id) const {
  if (auto it = assets.find(id); it != assets.end()) return it->second.states;
  if (const ObjectNode* o = find_object(id)) return o->states;
  return {};
}

std::vector<std::string> SceneGraph::affordances_of(const NodeId& id) const {
  if (auto it = assets.find(id); it != assets.end()) return it->second.affordances;
  if (const ObjectNode* o = find_object(id)) return o->affordances;
  return {};
}

bool SceneGraph::node_has_state(const NodeId& id, const std::string& s) const {
  return contains(states_of(id), s);
}

bool SceneGraph::node_has_affordance(const NodeId& id, const std::string& a) const {
  return contains(affordances_of(id), a);
}

std::vector<NodeId> SceneGraph::closed_ancestors(const NodeId& id) const {
  std::vector<NodeId> out;
  std::optional<NodeId> cur = parent_of(id);
  while (cur && !is_room(*cur)) {
    if (node_has_state(*cur, "closed")) out.push_back(*cur);
    cur = parent_of(*cur);
  }
  std::reverse(out.begin(), out.end());  // outermost first
  return out;
}

void SceneGraph::add_state(const NodeId& id, const std::string& s) {
  if (auto it = assets.find(id); it != assets.end()) {
    if (!it->second.has_state(s)) it->second.states.push_back(s);
    return;
  }
  if (ObjectNode* o = find_object(id)) {
    if (!o->has_state(s)) o->states.push_back(s);
    return;
  }
  throw UnknownNodeError("unknown node: " + id.text());
}

void SceneGraph::remove_state(const NodeId& id, const std::string& s) {
  auto erase = [&](std::vector<std::string>& v) { std::erase(v, s); };
  if (auto it = assets.find(id); it != assets.end()) return erase(it->second.states);
  if (ObjectNode* o = find_object(id)) return erase(o->states);
  throw UnknownNodeError("unknown node: " + id.text());
}

void SceneGraph::check_invariants() const {
  if (rooms.empty()) throw InvariantError("graph has no rooms");
  if (!rooms.count(agent.location))
    throw InvariantError("agent location is not a room: " + agent.location.text());
  if (agent.holding) {
    if (!held || held->id != *agent.holding)
      throw InvariantError("agent.holding does not match the detached object");
  } else if (held) {
    throw InvariantError("detached object present but agent holds nothing");
  }

  for (const auto& [id, asset] : assets) {
    if (!rooms.count(asset.room))
      throw InvariantError("asset '" + id.text() + "' has dangling room '" + asset.room.text() + "'");
  }
  for (const auto& [id, obj] : objects) {
    if (!assets.count(obj.parent) && !objects.count(obj.parent))
      throw InvariantError("object '" + id.text() + "' has dangling parent '" + obj.parent.text() + "'");
  }
  for (const auto& [id, room] : rooms) {
    if (assets.count(id) || objects.count(id))
      throw InvariantError("duplicate node id: " + id.text());
  }
  // Acyclic and connected to a room: walking parents from any object must
  // reach a room within the node count.
  size_t limit = objects.size() + assets.size() + 1;
  for (const auto& [id, obj] : objects) {
    std::optional<NodeId> cur = id;
    size_t steps = 0;
    while (cur && !is_room(*cur)) {
      cur = parent_of(*cur);
      if (++steps > limit) throw InvariantError("containment cycle at '" + id.text() + "'");
    }
    if (!cur) throw InvariantError("object '" + id.text() + "' not connected to a room");
  }
  // State pairs never held simultaneously.
  auto check_states = [&](const NodeId& id, const std::vector<std::string>& states) {
    auto has = [&](const char* s) { return contains(states, s); };
    if (has("on") && has("off"))
      throw InvariantError("node '" + id.text() + "' is both on and off");
    if (has("open") && has("closed"))
      throw InvariantError("node '" + id.text() + "' is both open and closed");
  };
  for (const auto& [id, a] : assets) check_states(id, a.states);
  for (const auto& [id, o] : objects) check_states(id, o.states);
  if (held) check_states(held->id, held->states);
}

std::set<NodeId> diff_changed_nodes(const SceneGraph& initial, const SceneGraph& goal) {
  auto universe = [](const SceneGraph& g) {
    std::set<NodeId> ids;
    for (const auto& [id, _] : g.rooms) ids.insert(id);
    for (const auto& [id, _] : g.assets) ids.insert(id);
    for (const auto& [id, _] : g.objects) ids.insert(id);
    if (g.held) ids.insert(g.held->id);
    return ids;
  };
  if (universe(initial) != universe(goal))
    throw UniverseMismatchError("graphs do not share the same node universe");

  auto sorted_states = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  std::set<NodeId> changed;
  for (const auto& [id, asset] : initial.assets) {
    if (sorted_states(asset.states) != sorted_states(goal.assets.at(id).states))
      changed.insert(id);
  }
  auto object_record = [&](const SceneGraph& g, const NodeId& id) {
    const ObjectNode* o = g.find_object(id);
    bool is_held = g.held && g.held->id == id;
    return std::tuple<bool, Relation, NodeId, std::vector<std::string>>(
        is_held, is_held ? Relation::ontop_of : o->relation, is_held ? NodeId() : o->parent,
        sorted_states(o->states));
  };
  for (const auto& [id, _] : initial.objects)
    if (object_record(initial, id) != object_record(goal, id)) changed.insert(id);
  if (initial.held && object_record(initial, initial.held->id) != object_record(goal, initial.held->id))
    changed.insert(initial.held->id);
  return changed;
}

std::string graph_hash(const SceneGraph& g) { return sha256_hex(g.serialize()); }

}  // namespace lpg
