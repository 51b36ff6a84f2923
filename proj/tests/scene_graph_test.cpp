#include <doctest.h>

#include <algorithm>
#include <random>

#include "lpg/errors.hpp"
#include "lpg/scene_graph.hpp"
#include "test_util.hpp"

using namespace lpg;
using lpg::test::load_fixture_graph;
using lpg::test::random_graph;

TEST_CASE("node id parsing") {
  NodeId id = NodeId::parse("candle-1");
  CHECK(id.category == "candle");
  CHECK(id.index == 1);
  CHECK(id.text() == "candle-1");
  CHECK(NodeId::parse("wicker_basket-12").text() == "wicker_basket-12");

  CHECK_THROWS_AS(NodeId::parse("apple"), IdError);
  CHECK_THROWS_AS(NodeId::parse(""), IdError);
  CHECK_THROWS_AS(NodeId::parse("candle-0"), IdError);
  CHECK_THROWS_AS(NodeId::parse("-3"), IdError);
  CHECK_THROWS_AS(NodeId::parse("Candle-1"), IdError);

  // PDDL wire form
  CHECK(NodeId::parse("water_glass1", true) == NodeId("water_glass", 1));
  CHECK_THROWS_AS(NodeId::parse("water_glass", true), IdError);
}

TEST_CASE("gift basket fixture parses to the expected shape") {
  SceneGraph g = load_fixture_graph("tasks/gift_baskets/initial.graph.json");
  CHECK(g.rooms.size() == 1);
  CHECK(g.assets.size() == 3);
  CHECK(g.objects.size() == 20);
  CHECK(g.agent.location == NodeId("living_room", 1));
  CHECK(!g.agent.holding);

  auto table_kids = g.descendants(NodeId("table", 1));
  CHECK(table_kids.size() == 8);  // 4 candles + 4 cookies
  int candles = 0;
  for (const auto& id : table_kids) candles += id.category == "candle";
  CHECK(candles == 4);
}

TEST_CASE("minimal one-room graph") {
  SceneGraph g = SceneGraph::parse(R"({"nodes": {"rooms": [{"name": "hall-1"}],
      "agent": {"name": "agent-1", "location": "hall-1"}}})");
  CHECK(g.rooms.size() == 1);
  CHECK(g.assets.empty());
  CHECK(g.objects.empty());
  // Serializes with empty asset and objects arrays.
  auto doc = nlohmann::json::parse(g.serialize());
  CHECK(doc["nodes"]["asset"].is_array());
  CHECK(doc["nodes"]["asset"].empty());
  CHECK(doc["nodes"]["objects"].empty());
}

TEST_CASE("alternate key spellings accepted") {
  SceneGraph g = SceneGraph::parse(R"({"nodes": {
      "room": [{"id": "kitchen-1"}],
      "assets": [{"id": "floor-1", "located": "kitchen-1"}],
      "object": [{"id": "cup-1", "relation": "ontop", "related_to": "floor-1"}],
      "agent": [{"id": "agent-1", "location": "kitchen-1", "holding": ""}]}})");
  CHECK(g.rooms.count(NodeId("kitchen", 1)) == 1);
  CHECK(g.assets.at(NodeId("floor", 1)).room == NodeId("kitchen", 1));
  CHECK(g.objects.at(NodeId("cup", 1)).relation == Relation::ontop_of);
}

TEST_CASE("duplicate id is an invariant error") {
  CHECK_THROWS_AS(SceneGraph::parse(R"({"nodes": {
      "rooms": [{"name": "hall-1"}],
      "asset": [{"name": "sofa-1", "room": "hall-1"}],
      "objects": [
        {"name": "carton-1", "relation": "ontop_of", "related_to": "sofa-1"},
        {"name": "carton-1", "relation": "ontop_of", "related_to": "sofa-1"}],
      "agent": {"name": "agent-1", "location": "hall-1"}}})"),
                  InvariantError);
}

TEST_CASE("dangling parent and cycles rejected") {
  CHECK_THROWS_AS(SceneGraph::parse(R"({"nodes": {
      "rooms": [{"name": "hall-1"}],
      "objects": [{"name": "cup-1", "relation": "ontop_of", "related_to": "ghost-9"}],
      "agent": {"name": "agent-1", "location": "hall-1"}}})"),
                  InvariantError);
  CHECK_THROWS_AS(SceneGraph::parse(R"({"nodes": {
      "rooms": [{"name": "hall-1"}],
      "objects": [
        {"name": "box-1", "relation": "inside_of", "related_to": "box-2"},
        {"name": "box-2", "relation": "inside_of", "related_to": "box-1"}],
      "agent": {"name": "agent-1", "location": "hall-1"}}})"),
                  InvariantError);
}

TEST_CASE("malformed node name is an id error") {
  CHECK_THROWS_AS(SceneGraph::parse(R"({"nodes": {
      "rooms": [{"name": "hall"}],
      "agent": {"name": "agent-1", "location": "hall-1"}}})"),
                  IdError);
}

TEST_CASE("round trip identity on the fixture") {
  SceneGraph g = load_fixture_graph("tasks/gift_baskets/initial.graph.json");
  std::string once = g.serialize();
  SceneGraph g2 = SceneGraph::parse(once);
  CHECK(g == g2);
  CHECK(g2.serialize() == once);
}

TEST_CASE("random graphs round trip byte-identically on second serialize") {
  std::mt19937 rng(7);
  for (int i = 0; i < 100; ++i) {
    SceneGraph g = random_graph(rng);
    std::string once = g.serialize();
    SceneGraph g2 = SceneGraph::parse(once);
    CHECK(g == g2);
    CHECK(g2.serialize() == once);
  }
}

TEST_CASE("descendants agrees with the parent map") {
  std::mt19937 rng(11);
  for (int i = 0; i < 25; ++i) {
    SceneGraph g = random_graph(rng);
    std::set<NodeId> covered;
    for (const auto& [room, _] : g.rooms)
      for (const auto& d : g.descendants(room)) covered.insert(d);
    size_t expected = g.assets.size() + g.objects.size();
    CHECK(covered.size() == expected);

    for (const auto& [id, _] : g.objects) {
      auto down = g.descendants(id);
      CHECK(std::find(down.begin(), down.end(), id) == down.end());
      // x in descendants(y) iff y is an ancestor of x
      for (const auto& x : down) {
        bool ancestor = false;
        auto cur = g.parent_of(x);
        while (cur) {
          if (*cur == id) { ancestor = true; break; }
          cur = g.parent_of(*cur);
        }
        CHECK(ancestor);
      }
    }
  }
  SceneGraph g = load_fixture_graph("tasks/gift_baskets/initial.graph.json");
  CHECK(g.descendants(NodeId("candle", 1)).empty());
  CHECK_THROWS_AS(g.descendants(NodeId("ghost", 1)), UnknownNodeError);
}

TEST_CASE("diff_changed_nodes") {
  SceneGraph g = load_fixture_graph("tasks/gift_baskets/initial.graph.json");
  CHECK(diff_changed_nodes(g, g).empty());

  SceneGraph goal = g;
  goal.objects.at(NodeId("candle", 1)).parent = NodeId("wicker_basket", 1);
  goal.objects.at(NodeId("candle", 1)).relation = Relation::inside_of;
  goal.objects.at(NodeId("candle", 2)).states = {"on"};
  auto changed = diff_changed_nodes(g, goal);
  CHECK(changed == std::set<NodeId>{NodeId("candle", 1), NodeId("candle", 2)});
  CHECK(changed == diff_changed_nodes(goal, g));  // symmetric as a set

  SceneGraph other = g;
  other.objects.erase(NodeId("bow", 4));
  CHECK_THROWS_AS(diff_changed_nodes(g, other), UniverseMismatchError);
}

TEST_CASE("diff catches k known mutations") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    SceneGraph g = random_graph(rng);
    if (g.objects.empty()) continue;
    SceneGraph goal = g;
    std::set<NodeId> mutated;
    for (auto& [id, obj] : goal.objects) {
      if (rng() % 3 == 0 && g.assets.size() > 1) {
        // move to a different asset
        for (const auto& [aid, _] : goal.assets) {
          if (aid != obj.parent) {
            // only counts as a change if nothing else about the node matches
            obj.parent = aid;
            obj.relation = Relation::ontop_of;
            if (g.objects.at(id).parent != aid ||
                g.objects.at(id).relation != Relation::ontop_of)
              mutated.insert(id);
            break;
          }
        }
      }
    }
    CHECK(diff_changed_nodes(g, goal) == mutated);
  }
}

TEST_CASE("held object round trips") {
  SceneGraph g = SceneGraph::parse(R"({"nodes": {
      "rooms": [{"name": "hall-1"}],
      "asset": [{"name": "sofa-1", "room": "hall-1", "affordances": ["put_on"]}],
      "objects": [{"name": "cup-1", "relation": null, "states": ["clear"],
                   "affordances": ["pick_up"]}],
      "agent": {"name": "agent-1", "location": "hall-1", "holding": "cup-1"}}})");
  CHECK(g.held);
  CHECK(g.held->id == NodeId("cup", 1));
  CHECK(g.agent.holding == NodeId("cup", 1));
  SceneGraph g2 = SceneGraph::parse(g.serialize());
  CHECK(g == g2);
}
