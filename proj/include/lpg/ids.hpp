#pragma once

#include <compare>
#include <string>

namespace lpg {

// A node identifier of the form `<category>-<index>`, e.g. `candle-1`.
// A bare category with no index is never a valid id: it is kept strict so
// that malformed references can be fed back to the planner instead of
// being silently repaired.
struct NodeId {
  std::string category;
  int index = 0;

  NodeId() = default;
  NodeId(std::string cat, int idx) : category(std::move(cat)), index(idx) {}

  // Parses `candle-1`. Also accepts the concatenated spelling `candle1`
  // when `allow_concatenated` is set (PDDL wire form).
  static NodeId parse(const std::string& text, bool allow_concatenated = false);

  std::string text() const { return category + "-" + std::to_string(index); }
  // Concatenated form used in PDDL files, e.g. `water_glass1`.
  std::string pddl_text() const { return category + std::to_string(index); }

  auto operator<=>(const NodeId& other) const {
    if (auto c = category <=> other.category; c != 0) return c;
    return index <=> other.index;
  }
  bool operator==(const NodeId&) const = default;
};

}  // namespace lpg
