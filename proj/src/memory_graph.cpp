#include "lpg/memory_graph.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "lpg/errors.hpp"

namespace lpg {

using nlohmann::ordered_json;

MemoryGraph MemoryGraph::init(const SceneGraph& g) {
  MemoryGraph m;
  m.world = g;
  for (const auto& [id, _] : g.objects) m.unseen.insert(id);
  if (g.held) m.unseen.insert(g.held->id);
  return m;
}

void MemoryGraph::apply_discovery(const NodeId& asset,
                                  const std::vector<ObservedObject>& observed) {
  if (!world.has_node(asset)) throw UnknownNodeError("unknown node: " + asset.text());

  // Drop unseen priors under the inspected asset, leaves first.
  auto descendants = world.descendants(asset);
  for (auto it = descendants.rbegin(); it != descendants.rend(); ++it) {
    if (world.objects.count(*it) && unseen.count(*it) && world.children_of(*it).empty()) {
      world.objects.erase(*it);
      unseen.erase(*it);
    }
  }
  // Surviving children of a deleted prior keep a valid parent.
  for (auto& [id, obj] : world.objects)
    if (!world.has_node(obj.parent)) obj.parent = asset, obj.relation = Relation::ontop_of;

  for (const ObservedObject& o : observed) {
    if (!world.has_node(o.parent))
      throw UnknownNodeError("observed parent '" + o.parent.text() + "' is unknown");
    if (o.id == o.parent)
      throw InvariantError("observed edge would create a cycle at '" + o.id.text() + "'");
    if (auto it = world.objects.find(o.id); it != world.objects.end()) {
      // A cycle would arise if the new parent sits below the object itself.
      auto below = world.descendants(o.id);
      if (std::find(below.begin(), below.end(), o.parent) != below.end())
        throw InvariantError("observed edge would create a cycle at '" + o.id.text() + "'");
      it->second.relation = o.relation;
      it->second.parent = o.parent;
      it->second.states = o.states;
    } else {
      ObjectNode node;
      node.id = o.id;
      node.relation = o.relation;
      node.parent = o.parent;
      node.states = o.states;
      node.affordances = o.affordances.empty() ? std::vector<std::string>{"pick_up"}
                                               : o.affordances;
      world.objects.emplace(node.id, node);
    }
    unseen.erase(o.id);
    seen.insert(o.id);
  }
  discovered_assets.insert(asset);
}

void MemoryGraph::record_step(const std::string& reason, const Action& a) {
  history.push_back({reason, a.text()});
  switch (a.kind) {
    case ActionKind::pick_up:
    case ActionKind::put_on:
    case ActionKind::put_inside:
    case ActionKind::put_under:
    case ActionKind::attach:
    case ActionKind::open:
    case ActionKind::close:
    case ActionKind::turn_on:
    case ActionKind::turn_off:
    case ActionKind::rearrange:
      interacted.insert(a.target);
      if (a.destination) interacted.insert(*a.destination);
      break;
    default:
      break;
  }
}

namespace {

std::string states_clause(const std::vector<std::string>& states) {
  if (states.empty()) return "";
  std::string out = " in states ";
  for (size_t i = 0; i < states.size(); ++i) {
    if (i) out += ", ";
    out += states[i];
  }
  return out;
}

}  // namespace

std::string MemoryGraph::prompt_view(const PromptViewOptions& opts) const {
  const NodeId here = world.agent.location;
  auto in_current_room = [&](const NodeId& id) {
    if (opts.full_graph) return true;
    auto room = world.room_of(id);
    return room && *room == here;
  };

  std::vector<const AssetNode*> local_assets;
  std::vector<const ObjectNode*> local_seen, local_unseen;
  std::vector<const AssetNode*> remote_assets;
  std::vector<const ObjectNode*> remote_seen;
  for (const auto& [id, asset] : world.assets) {
    if (in_current_room(id))
      local_assets.push_back(&asset);
    else if (interacted.count(id) || discovered_assets.count(id))
      remote_assets.push_back(&asset);
  }
  for (const auto& [id, obj] : world.objects) {
    if (in_current_room(id)) {
      (seen.count(id) ? local_seen : local_unseen).push_back(&obj);
    } else if (seen.count(id) || interacted.count(id)) {
      remote_seen.push_back(&obj);
    }
  }

  if (opts.json_graph) {
    ordered_json doc;
    ordered_json places = ordered_json::array();
    for (const auto& [id, _] : world.rooms) places.push_back(id.text());
    doc["places"] = places;
    doc["agent"] = {{"location", here.text()},
                    {"holding", world.agent.holding ? world.agent.holding->text() : "nothing"}};
    auto asset_json = [](const AssetNode* a) {
      return ordered_json{{"name", a->id.text()}, {"room", a->room.text()}, {"states", a->states}};
    };
    auto obj_json = [](const ObjectNode* o) {
      return ordered_json{{"name", o->id.text()},
                          {"relation", relation_name(o->relation)},
                          {"related_to", o->parent.text()},
                          {"states", o->states}};
    };
    ordered_json arr = ordered_json::array();
    for (auto* a : local_assets) arr.push_back(asset_json(a));
    doc["assets"] = arr;
    arr = ordered_json::array();
    for (auto* o : local_seen) arr.push_back(obj_json(o));
    doc["discovered_objects"] = arr;
    arr = ordered_json::array();
    for (auto* o : local_unseen) arr.push_back(obj_json(o));
    doc["memory_objects"] = arr;
    arr = ordered_json::array();
    for (auto* a : remote_assets) arr.push_back(asset_json(a));
    for (auto* o : remote_seen) arr.push_back(obj_json(o));
    doc["other_rooms"] = arr;
    return doc.dump(2);
  }

  std::ostringstream out;
  out << "Building has the following places: ";
  size_t i = 0;
  for (const auto& [id, _] : world.rooms) {
    if (i++) out << ", ";
    out << id.text();
  }
  out << ".\n";

  out << "\nYou are located in " << here.text() << " and holding "
      << (world.agent.holding ? world.agent.holding->text() : "nothing") << ".\n";

  auto asset_line = [&](const AssetNode* a, bool with_room) {
    std::string line = a->id.text();
    if (with_room) line += " in " + a->room.text();
    line += states_clause(a->states);
    return line;
  };
  auto object_line = [&](const ObjectNode* o, bool with_room) {
    std::string line = o->id.text() + " " + relation_short_name(o->relation) + " " +
                       o->parent.text();
    if (with_room) {
      if (auto room = world.room_of(o->id)) line += " in " + room->text();
    }
    line += states_clause(o->states);
    return line;
  };

  if (!local_assets.empty()) {
    out << "\nIn this room, you found the following assets:\n";
    for (auto* a : local_assets) out << asset_line(a, opts.full_graph) << "\n";
  }
  if (!local_seen.empty()) {
    out << "\nIn this room, you discover objects:\n";
    for (auto* o : local_seen) out << object_line(o, opts.full_graph) << "\n";
  }
  if (!local_unseen.empty()) {
    out << "\nYou remember that in this room were objects:\n";
    for (auto* o : local_unseen) out << object_line(o, opts.full_graph) << "\n";
  }
  if (!remote_assets.empty() || !remote_seen.empty()) {
    out << "\nYou also know that in other rooms:\n";
    for (auto* a : remote_assets) out << asset_line(a, true) << "\n";
    for (auto* o : remote_seen) out << object_line(o, true) << "\n";
  }
  return out.str();
}

std::string MemoryGraph::dump_json() const {
  ordered_json doc;
  doc["world"] = nlohmann::json::parse(world.serialize());
  auto set_json = [](const std::set<NodeId>& s) {
    ordered_json arr = ordered_json::array();
    for (const auto& id : s) arr.push_back(id.text());
    return arr;
  };
  doc["seen"] = set_json(seen);
  doc["unseen"] = set_json(unseen);
  doc["discovered_assets"] = set_json(discovered_assets);
  doc["interacted"] = set_json(interacted);
  ordered_json hist = ordered_json::array();
  for (const auto& h : history) hist.push_back({{"reason", h.reason}, {"action", h.action_text}});
  doc["history"] = hist;
  return doc.dump(2);
}

}  // namespace lpg
