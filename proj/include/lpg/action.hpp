#pragma once

#include <optional>
#include <string>
#include <variant>

#include "lpg/ids.hpp"
#include "lpg/scene_graph.hpp"

namespace lpg {

enum class ActionKind {
  go_to,
  pick_up,
  put_on,
  put_inside,
  put_under,
  attach,
  open,
  close,
  turn_on,
  turn_off,
  discover_objects,
  rearrange,
  done,
};

std::string action_kind_name(ActionKind k);
std::optional<ActionKind> action_kind_from_string(const std::string& s);

struct Action {
  ActionKind kind = ActionKind::done;
  NodeId target;
  // rearrange only:
  std::optional<Relation> relation;
  std::optional<NodeId> destination;

  std::string text() const;  // `rearrange(cup-1, inside, coffee_machine-1)`
  bool operator==(const Action&) const = default;
};

enum class FeedbackStatus { ok, hallucination, infeasible };

enum class FeedbackCategory {
  none,
  unknown_node,
  malformed_id,
  invalid_function,
  wrong_node_type,
  redundant_discovery,
  closed_container,
  hand_occupied,
  hand_empty,
  missing_affordance,
  wrong_state,
  wrong_room,
};

std::string feedback_category_name(FeedbackCategory c);

// Structured result of checking or simulating an action. Never thrown;
// failures are data handed back to the planner for re-prompting.
struct Feedback {
  FeedbackStatus status = FeedbackStatus::ok;
  FeedbackCategory category = FeedbackCategory::none;
  std::string message;

  static Feedback ok() { return {}; }
  static Feedback hallucination(FeedbackCategory c, std::string msg) {
    return {FeedbackStatus::hallucination, c, std::move(msg)};
  }
  static Feedback infeasible(FeedbackCategory c, std::string msg) {
    return {FeedbackStatus::infeasible, c, std::move(msg)};
  }
  bool is_ok() const { return status == FeedbackStatus::ok; }
};

// Parses an action from either the JSON-object form
// `{"function_name": "...", "node": "...", ...}` (optionally wrapped in a
// full `{"reason": ..., "action": {...}}` response) or the call form
// `fn(arg, ...)`. Node ids are resolved against the graph; unresolvable
// input comes back as hallucination Feedback.
std::variant<Action, Feedback> parse_action(const std::string& text, const SceneGraph& g);

}  // namespace lpg
