#include "lpg/action.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "lpg/errors.hpp"

namespace lpg {

using nlohmann::json;

std::string action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::go_to: return "go_to";
    case ActionKind::pick_up: return "pick_up";
    case ActionKind::put_on: return "put_on";
    case ActionKind::put_inside: return "put_inside";
    case ActionKind::put_under: return "put_under";
    case ActionKind::attach: return "attach";
    case ActionKind::open: return "open";
    case ActionKind::close: return "close";
    case ActionKind::turn_on: return "turn_on";
    case ActionKind::turn_off: return "turn_off";
    case ActionKind::discover_objects: return "discover_objects";
    case ActionKind::rearrange: return "rearrange";
    case ActionKind::done: return "done";
  }
  return "done";
}

std::optional<ActionKind> action_kind_from_string(const std::string& s) {
  static const std::map<std::string, ActionKind> names = {
      {"go_to", ActionKind::go_to},
      {"goto", ActionKind::go_to},
      {"pick_up", ActionKind::pick_up},
      {"pickup", ActionKind::pick_up},
      {"put_on", ActionKind::put_on},
      {"put_inside", ActionKind::put_inside},
      {"put_in", ActionKind::put_inside},
      {"put_under", ActionKind::put_under},
      {"attach", ActionKind::attach},
      {"open", ActionKind::open},
      {"close", ActionKind::close},
      {"turn_on", ActionKind::turn_on},
      {"turn_off", ActionKind::turn_off},
      {"discover_objects", ActionKind::discover_objects},
      {"discover", ActionKind::discover_objects},
      {"rearrange", ActionKind::rearrange},
      {"done", ActionKind::done},
  };
  auto it = names.find(s);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

std::string feedback_category_name(FeedbackCategory c) {
  switch (c) {
    case FeedbackCategory::none: return "none";
    case FeedbackCategory::unknown_node: return "unknown_node";
    case FeedbackCategory::malformed_id: return "malformed_id";
    case FeedbackCategory::invalid_function: return "invalid_function";
    case FeedbackCategory::wrong_node_type: return "wrong_node_type";
    case FeedbackCategory::redundant_discovery: return "redundant_discovery";
    case FeedbackCategory::closed_container: return "closed_container";
    case FeedbackCategory::hand_occupied: return "hand_occupied";
    case FeedbackCategory::hand_empty: return "hand_empty";
    case FeedbackCategory::missing_affordance: return "missing_affordance";
    case FeedbackCategory::wrong_state: return "wrong_state";
    case FeedbackCategory::wrong_room: return "wrong_room";
  }
  return "none";
}

std::string Action::text() const {
  if (kind == ActionKind::rearrange) {
    return "rearrange(" + target.text() + ", " +
           relation_short_name(relation.value_or(Relation::ontop_of)) + ", " +
           (destination ? destination->text() : std::string("?")) + ")";
  }
  return action_kind_name(kind) + "(" + target.text() + ")";
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct RawCall {
  std::string function;
  std::vector<std::string> args;
};

std::optional<RawCall> parse_call_syntax(const std::string& text) {
  std::string s = trim(text);
  auto open = s.find('(');
  if (open == std::string::npos) {
    // bare function name, e.g. `done`
    if (s.empty()) return std::nullopt;
    for (char c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return std::nullopt;
    return RawCall{s, {}};
  }
  auto close = s.rfind(')');
  if (close == std::string::npos || close < open) return std::nullopt;
  RawCall call;
  call.function = trim(s.substr(0, open));
  std::string inner = s.substr(open + 1, close - open - 1);
  size_t start = 0;
  while (start <= inner.size()) {
    auto comma = inner.find(',', start);
    std::string piece = comma == std::string::npos ? inner.substr(start)
                                                   : inner.substr(start, comma - start);
    piece = trim(piece);
    if (!piece.empty()) call.args.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return call;
}

std::optional<RawCall> parse_json_form(const std::string& text) {
  auto open = text.find('{');
  auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  json doc;
  try {
    doc = json::parse(text.substr(open, close - open + 1));
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
  if (!doc.is_object()) return std::nullopt;
  if (doc.contains("action") && doc["action"].is_object()) doc = doc["action"];
  if (!doc.contains("function_name") || !doc["function_name"].is_string()) return std::nullopt;
  RawCall call;
  call.function = doc["function_name"].get<std::string>();
  auto push_str = [&](const char* key) {
    if (doc.contains(key) && doc[key].is_string() && !doc[key].get<std::string>().empty())
      call.args.push_back(doc[key].get<std::string>());
  };
  push_str("node");
  push_str("relation");
  push_str("destination");
  return call;
}

std::variant<NodeId, Feedback> resolve_node(const std::string& name, const SceneGraph& g) {
  NodeId id;
  try {
    id = NodeId::parse(name);
  } catch (const IdError&) {
    // Planner prompts quote ids in the concatenated wire form too.
    try {
      id = NodeId::parse(name, /*allow_concatenated=*/true);
    } catch (const IdError&) {
      return Feedback::hallucination(FeedbackCategory::malformed_id,
                                     "'" + name + "' is not a valid node id; node ids look "
                                     "like 'category-1'");
    }
  }
  if (!g.has_node(id))
    return Feedback::hallucination(FeedbackCategory::unknown_node,
                                   "node '" + id.text() + "' does not exist in the scene");
  return id;
}

}  // namespace

std::variant<Action, Feedback> parse_action(const std::string& text, const SceneGraph& g) {
  std::optional<RawCall> call = parse_json_form(text);
  if (!call) call = parse_call_syntax(text);
  if (!call)
    return Feedback::hallucination(FeedbackCategory::invalid_function,
                                   "could not parse an action from the response");

  auto kind = action_kind_from_string(call->function);
  if (!kind)
    return Feedback::hallucination(FeedbackCategory::invalid_function,
                                   "'" + call->function + "' is not an available function");

  Action action;
  action.kind = *kind;

  if (*kind == ActionKind::done) {
    // The argument of done(<node>) is accepted and discarded.
    action.target = g.agent.id;
    return action;
  }

  if (call->args.empty())
    return Feedback::hallucination(FeedbackCategory::invalid_function,
                                   "'" + call->function + "' requires a node argument");

  auto target = resolve_node(call->args[0], g);
  if (std::holds_alternative<Feedback>(target)) return std::get<Feedback>(target);
  action.target = std::get<NodeId>(target);

  if (*kind == ActionKind::rearrange) {
    if (call->args.size() != 3)
      return Feedback::hallucination(
          FeedbackCategory::invalid_function,
          "rearrange requires (node, relation, destination) arguments");
    auto rel = relation_from_string(call->args[1]);
    if (!rel || (*rel != Relation::inside_of && *rel != Relation::ontop_of))
      return Feedback::hallucination(FeedbackCategory::invalid_function,
                                     "rearrange relation must be 'inside' or 'ontop'");
    action.relation = rel;
    auto dest = resolve_node(call->args[2], g);
    if (std::holds_alternative<Feedback>(dest)) return std::get<Feedback>(dest);
    action.destination = std::get<NodeId>(dest);
  } else if (call->args.size() > 1) {
    return Feedback::hallucination(FeedbackCategory::invalid_function,
                                   "'" + call->function + "' takes a single node argument");
  }
  return action;
}

}  // namespace lpg
