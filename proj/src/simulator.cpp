#include "lpg/simulator.hpp"

#include <algorithm>

#include "lpg/errors.hpp"

namespace lpg {
namespace sim {

namespace {

Feedback wrong_type(const NodeId& id, const std::string& expected) {
  return Feedback::hallucination(FeedbackCategory::wrong_node_type,
                                 "'" + id.text() + "' is not " + expected);
}

Feedback check_room_colocated(const SceneGraph& g, const NodeId& id) {
  auto room = g.room_of(id);
  if (!room)
    return Feedback::infeasible(FeedbackCategory::wrong_room,
                                "'" + id.text() + "' is not reachable from any room");
  if (*room != g.agent.location)
    return Feedback::infeasible(FeedbackCategory::wrong_room,
                                "'" + id.text() + "' is in " + room->text() +
                                    " but you are in " + g.agent.location.text());
  return Feedback::ok();
}

Feedback check_affordance(const SceneGraph& g, const NodeId& id, const std::string& aff) {
  if (!g.node_has_affordance(id, aff))
    return Feedback::infeasible(FeedbackCategory::missing_affordance,
                                "'" + id.text() + "' does not afford " + aff);
  return Feedback::ok();
}

std::string put_affordance(ActionKind k) {
  switch (k) {
    case ActionKind::put_on: return "put_on";
    case ActionKind::put_inside: return "put_inside";
    case ActionKind::put_under: return "put_under";
    case ActionKind::attach: return "attach";
    default: return "";
  }
}

Relation put_relation(ActionKind k) {
  switch (k) {
    case ActionKind::put_inside: return Relation::inside_of;
    case ActionKind::put_under: return Relation::under_of;
    case ActionKind::attach: return Relation::attached_to;
    default: return Relation::ontop_of;
  }
}

Feedback check_pick_up(const SceneGraph& g, const Action& a) {
  if (!g.is_object(a.target)) return wrong_type(a.target, "a movable object");
  if (Feedback f = check_affordance(g, a.target, "pick_up"); !f.is_ok()) return f;
  if (g.agent.holding)
    return Feedback::infeasible(FeedbackCategory::hand_occupied,
                                "your hand is occupied by '" + g.agent.holding->text() +
                                    "'; you can handle only one item");
  if (Feedback f = check_room_colocated(g, a.target); !f.is_ok()) return f;
  // The hand carries one bare item; loaded containers stay put.
  if (!g.children_of(a.target).empty())
    return Feedback::infeasible(FeedbackCategory::wrong_state,
                                "'" + a.target.text() + "' is not empty");
  auto closed = g.closed_ancestors(a.target);
  if (!closed.empty())
    return Feedback::infeasible(FeedbackCategory::closed_container,
                                "'" + a.target.text() + "' is inside closed '" +
                                    closed.back().text() + "'");
  return Feedback::ok();
}

Feedback check_put(const SceneGraph& g, const Action& a) {
  if (!g.agent.holding)
    return Feedback::infeasible(FeedbackCategory::hand_empty, "you are not holding anything");
  if (!g.is_asset(a.target) && !g.is_object(a.target))
    return wrong_type(a.target, "an asset or object");
  if (a.target == *g.agent.holding)
    return Feedback::infeasible(FeedbackCategory::wrong_state,
                                "cannot place '" + a.target.text() + "' onto itself");
  if (Feedback f = check_room_colocated(g, a.target); !f.is_ok()) return f;
  if (Feedback f = check_affordance(g, a.target, put_affordance(a.kind)); !f.is_ok()) return f;
  if (a.kind == ActionKind::put_inside && g.node_has_state(a.target, "closed"))
    return Feedback::infeasible(FeedbackCategory::closed_container,
                                "'" + a.target.text() + "' is closed");
  return Feedback::ok();
}

Feedback check_toggle(const SceneGraph& g, const Action& a) {
  if (!g.is_asset(a.target) && !g.is_object(a.target))
    return wrong_type(a.target, "an asset or object");
  if (Feedback f = check_room_colocated(g, a.target); !f.is_ok()) return f;
  const char* aff = nullptr;
  switch (a.kind) {
    case ActionKind::open: aff = "open"; break;
    case ActionKind::close: aff = "close"; break;
    case ActionKind::turn_on: aff = "turn_on"; break;
    case ActionKind::turn_off: aff = "turn_off"; break;
    default: break;
  }
  if (Feedback f = check_affordance(g, a.target, aff); !f.is_ok()) return f;
  switch (a.kind) {
    case ActionKind::open:
      if (!g.node_has_state(a.target, "closed"))
        return Feedback::infeasible(FeedbackCategory::wrong_state,
                                    "'" + a.target.text() + "' is not closed");
      break;
    case ActionKind::close:
      // Permissive: anything not explicitly closed may be closed.
      if (g.node_has_state(a.target, "closed"))
        return Feedback::infeasible(FeedbackCategory::wrong_state,
                                    "'" + a.target.text() + "' is already closed");
      break;
    case ActionKind::turn_on:
      if (!g.node_has_state(a.target, "off"))
        return Feedback::infeasible(FeedbackCategory::wrong_state,
                                    "'" + a.target.text() + "' is not off");
      break;
    case ActionKind::turn_off:
      if (!g.node_has_state(a.target, "on"))
        return Feedback::infeasible(FeedbackCategory::wrong_state,
                                    "'" + a.target.text() + "' is not on");
      break;
    default: break;
  }
  return Feedback::ok();
}

Feedback check_rearrange(const SceneGraph& g, const Action& a) {
  if (!g.is_object(a.target)) return wrong_type(a.target, "a movable object");
  if (Feedback f = check_affordance(g, a.target, "pick_up"); !f.is_ok()) return f;
  if (!a.relation || !a.destination)
    return Feedback::hallucination(FeedbackCategory::invalid_function,
                                   "rearrange requires a relation and a destination");
  const NodeId& dest = *a.destination;
  if (!g.is_asset(dest) && !g.is_object(dest)) return wrong_type(dest, "an asset or object");
  if (dest == a.target)
    return Feedback::infeasible(FeedbackCategory::wrong_state,
                                "cannot rearrange '" + a.target.text() + "' onto itself");
  std::string aff = *a.relation == Relation::inside_of ? "put_inside" : "put_on";
  if (Feedback f = check_affordance(g, dest, aff); !f.is_ok()) return f;
  if (g.agent.holding && *g.agent.holding != a.target)
    return Feedback::infeasible(FeedbackCategory::hand_occupied,
                                "your hand is occupied by '" + g.agent.holding->text() + "'");
  if (const ObjectNode* obj = g.objects.count(a.target) ? &g.objects.at(a.target) : nullptr;
      obj && obj->parent == dest && obj->relation == *a.relation)
    return Feedback::infeasible(FeedbackCategory::wrong_state,
                                "'" + a.target.text() + "' is already " +
                                    relation_short_name(*a.relation) + " '" + dest.text() + "'");
  return Feedback::ok();
}

}  // namespace

Feedback check(const SceneGraph& g, const Action& a, const std::set<NodeId>* discovered) {
  switch (a.kind) {
    case ActionKind::go_to:
      if (!g.is_room(a.target)) return wrong_type(a.target, "a room");
      return Feedback::ok();
    case ActionKind::pick_up:
      return check_pick_up(g, a);
    case ActionKind::put_on:
    case ActionKind::put_inside:
    case ActionKind::put_under:
    case ActionKind::attach:
      return check_put(g, a);
    case ActionKind::open:
    case ActionKind::close:
    case ActionKind::turn_on:
    case ActionKind::turn_off:
      return check_toggle(g, a);
    case ActionKind::discover_objects:
      if (g.is_room(a.target))
        return Feedback::hallucination(FeedbackCategory::wrong_node_type,
                                       "discover_objects cannot target the room '" +
                                           a.target.text() + "'; inspect assets or objects");
      if (!g.is_asset(a.target) && !g.is_object(a.target))
        return wrong_type(a.target, "an asset or object");
      if (discovered && discovered->count(a.target))
        return Feedback::hallucination(FeedbackCategory::redundant_discovery,
                                       "'" + a.target.text() + "' was already inspected");
      return Feedback::ok();
    case ActionKind::rearrange:
      return check_rearrange(g, a);
    case ActionKind::done:
      return Feedback::ok();
  }
  return Feedback::ok();
}

SceneGraph apply(const SceneGraph& g, const Action& a, const std::set<NodeId>* discovered) {
  if (a.kind == ActionKind::rearrange)
    throw PreconditionViolation("rearrange must be expanded by correct() before apply()");
  Feedback f = check(g, a, discovered);
  if (!f.is_ok()) throw PreconditionViolation("apply without passing check: " + f.message);

  SceneGraph out = g;
  switch (a.kind) {
    case ActionKind::go_to:
      out.agent.location = a.target;
      break;
    case ActionKind::pick_up: {
      ObjectNode obj = out.objects.at(a.target);
      out.objects.erase(a.target);
      out.held = obj;
      out.agent.holding = a.target;
      break;
    }
    case ActionKind::put_on:
    case ActionKind::put_inside:
    case ActionKind::put_under:
    case ActionKind::attach: {
      ObjectNode obj = *out.held;
      obj.relation = put_relation(a.kind);
      obj.parent = a.target;
      out.objects.emplace(obj.id, obj);
      out.held.reset();
      out.agent.holding.reset();
      break;
    }
    case ActionKind::open:
      out.remove_state(a.target, "closed");
      out.add_state(a.target, "open");
      break;
    case ActionKind::close:
      out.remove_state(a.target, "open");
      out.add_state(a.target, "closed");
      break;
    case ActionKind::turn_on:
      out.remove_state(a.target, "off");
      out.add_state(a.target, "on");
      break;
    case ActionKind::turn_off:
      out.remove_state(a.target, "on");
      out.add_state(a.target, "off");
      break;
    case ActionKind::discover_objects:
    case ActionKind::done:
    case ActionKind::rearrange:
      break;
  }
  return out;
}

namespace {

// Appends `step` to the plan and advances the working state, or reports
// why the step itself cannot execute.
std::optional<Feedback> push_step(std::vector<Action>& plan, SceneGraph& work,
                                  const Action& step) {
  Feedback f = check(work, step);
  if (!f.is_ok()) return f;
  work = apply(work, step);
  plan.push_back(step);
  return std::nullopt;
}

std::variant<CorrectedPlanStep, Feedback> expand_rearrange(const SceneGraph& g,
                                                           const Action& a) {
  if (Feedback f = check_rearrange(g, a); !f.is_ok()) return f;

  std::vector<Action> plan;
  SceneGraph work = g;
  const NodeId& target = a.target;
  const NodeId& dest = *a.destination;

  bool already_held = g.agent.holding && *g.agent.holding == target;
  if (!already_held) {
    auto troom = work.room_of(target);
    if (troom && *troom != work.agent.location)
      if (auto f = push_step(plan, work, {ActionKind::go_to, *troom})) return *f;
    for (const NodeId& c : work.closed_ancestors(target))
      if (auto f = push_step(plan, work, {ActionKind::open, c})) return *f;
    if (auto f = push_step(plan, work, {ActionKind::pick_up, target})) return *f;
  }
  auto droom = work.room_of(dest);
  if (droom && *droom != work.agent.location)
    if (auto f = push_step(plan, work, {ActionKind::go_to, *droom})) return *f;
  if (*a.relation == Relation::inside_of && work.node_has_state(dest, "closed"))
    if (auto f = push_step(plan, work, {ActionKind::open, dest})) return *f;
  ActionKind put = *a.relation == Relation::inside_of ? ActionKind::put_inside
                                                      : ActionKind::put_on;
  if (auto f = push_step(plan, work, {put, dest})) return *f;
  return CorrectedPlanStep{plan};
}

}  // namespace

std::variant<CorrectedPlanStep, Feedback> correct(const SceneGraph& g, const Action& a,
                                                  const std::set<NodeId>* discovered) {
  if (a.kind == ActionKind::rearrange) return expand_rearrange(g, a);

  std::vector<Action> plan;
  SceneGraph work = g;
  bool inserted_go_to = false;
  // Rule order is fixed: room travel first, then containment, then the
  // destination, so expansions are deterministic.
  for (int guard = 0; guard < 16; ++guard) {
    Feedback f = check(work, a, discovered);
    if (f.is_ok()) {
      plan.push_back(a);
      return CorrectedPlanStep{plan};
    }
    if (f.status == FeedbackStatus::hallucination) return f;
    switch (f.category) {
      case FeedbackCategory::wrong_room: {
        if (inserted_go_to) return f;
        auto room = work.room_of(a.target);
        if (!room) return f;
        if (auto err = push_step(plan, work, {ActionKind::go_to, *room})) return *err;
        inserted_go_to = true;
        break;
      }
      case FeedbackCategory::closed_container: {
        if (a.kind == ActionKind::pick_up) {
          for (const NodeId& c : work.closed_ancestors(a.target))
            if (auto err = push_step(plan, work, {ActionKind::open, c})) return *err;
        } else if (a.kind == ActionKind::put_inside) {
          if (auto err = push_step(plan, work, {ActionKind::open, a.target})) return *err;
        } else {
          return f;
        }
        break;
      }
      default:
        return f;
    }
  }
  return Feedback::infeasible(FeedbackCategory::wrong_state,
                              "could not correct '" + a.text() + "'");
}

std::string alfworld_asset_observation(const SceneGraph& g, const NodeId& asset) {
  auto kids = g.children_of(asset);
  if (g.node_has_state(asset, "closed")) {
    return "The " + asset.text() + " is closed.";
  }
  if (kids.empty()) {
    if (g.node_has_state(asset, "on")) return "You see turned on " + asset.text() + ".";
    if (g.node_has_state(asset, "off")) return "You see turned off " + asset.text() + ".";
    return "On the " + asset.text() + " you see nothing.";
  }
  std::string list;
  for (size_t i = 0; i < kids.size(); ++i) {
    if (i) list += ", ";
    list += kids[i].text();
  }
  return "On the " + asset.text() + " you see " + list + ".";
}

std::string alfworld_feedback(const SceneGraph& g, const Action& a, const Feedback& result) {
  if (!result.is_ok()) return "Nothing happens.";
  switch (a.kind) {
    case ActionKind::go_to: {
      auto assets = g.children_of(a.target);
      std::string msg = "You are in middle of " + a.target.text() + ".";
      msg += " Looking quickly around you see ";
      if (assets.empty()) {
        msg += "nothing.";
      } else {
        for (size_t i = 0; i < assets.size(); ++i) {
          if (i) msg += ", ";
          msg += assets[i].text();
        }
        msg += ".";
      }
      return msg;
    }
    case ActionKind::pick_up: {
      const ObjectNode* obj = g.find_object(a.target);
      return "You pick up " + a.target.text() + " from " +
             (obj ? obj->parent.text() : std::string("here")) + ".";
    }
    case ActionKind::put_on:
      return "You put " + (g.agent.holding ? g.agent.holding->text() : "it") + " on " +
             a.target.text() + ".";
    case ActionKind::put_inside:
      return "You put " + (g.agent.holding ? g.agent.holding->text() : "it") + " inside " +
             a.target.text() + ".";
    case ActionKind::put_under:
      return "You put " + (g.agent.holding ? g.agent.holding->text() : "it") + " under " +
             a.target.text() + ".";
    case ActionKind::attach:
      return "You attach " + (g.agent.holding ? g.agent.holding->text() : "it") + " to " +
             a.target.text() + ".";
    case ActionKind::open:
      return "You open " + a.target.text() + ".";
    case ActionKind::close:
      return "You close " + a.target.text() + ".";
    case ActionKind::turn_on:
      return "You turn on " + a.target.text() + ".";
    case ActionKind::turn_off:
      return "You turn off " + a.target.text() + ".";
    case ActionKind::discover_objects:
      return alfworld_asset_observation(g, a.target);
    case ActionKind::rearrange:
    case ActionKind::done:
      return "";
  }
  return "";
}

}  // namespace sim
}  // namespace lpg
