#include "lpg/pddl.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "lpg/errors.hpp"

namespace lpg::pddl {

namespace {

// Appendix-style domain file for the instruction-following environment,
// shipped as a resource so emitted problems always pair with it.
const char* kDomain = R"((define (domain instruction-following)
  (:requirements :strips :typing)
  (:types room object agent)
  (:predicates
    (robot-in ?r - room)
    (object-room ?o - object ?r - room)
    (agent-hold ?o - object)
    (hand-empty)
    (ontop ?o1 - object ?o2 - object)
    (inside ?o1 - object ?o2 - object)
    (closed ?o - object)
    (on-state ?o - object))

  (:action go_to
    :parameters (?from ?to - room)
    :precondition (robot-in ?from)
    :effect (and (robot-in ?to) (not (robot-in ?from))))

  (:action pick_up
    :parameters (?obj - object ?s - object ?r - room)
    :precondition (and (robot-in ?r) (object-room ?obj ?r)
                       (object-room ?s ?r) (hand-empty)
                       (or (ontop ?obj ?s)
                           (and (inside ?obj ?s) (not (closed ?s)))))
    :effect (and (agent-hold ?obj) (not (ontop ?obj ?s))
                 (not (inside ?obj ?s)) (not (hand-empty))))

  (:action put_on
    :parameters (?obj - object ?s - object ?r - room)
    :precondition (and (robot-in ?r) (object-room ?s ?r)
                       (agent-hold ?obj))
    :effect (and (ontop ?obj ?s) (object-room ?obj ?r)
                 (not (agent-hold ?obj)) (hand-empty)))

  (:action put_inside
    :parameters (?obj - object ?c - object ?r - room)
    :precondition (and (robot-in ?r) (object-room ?c ?r)
                       (agent-hold ?obj) (not (closed ?c)))
    :effect (and (inside ?obj ?c) (object-room ?obj ?r)
                 (not (agent-hold ?obj)) (hand-empty)))

  (:action turn_on
    :parameters (?d - object ?r - room)
    :precondition (and (not (on-state ?d))
                       (robot-in ?r) (object-room ?d ?r))
    :effect (on-state ?d))

  (:action turn_off
    :parameters (?d - object ?r - room)
    :precondition (and (on-state ?d)
                       (robot-in ?r) (object-room ?d ?r))
    :effect (not (on-state ?d)))

  (:action open
    :parameters (?c - object ?r - room)
    :precondition (and (closed ?c) (robot-in ?r)
                       (object-room ?c ?r))
    :effect (not (closed ?c)))

  (:action close
    :parameters (?c - object ?r - room)
    :precondition (and (not (closed ?c)) (robot-in ?r)
                       (object-room ?c ?r))
    :effect (closed ?c)))
)";

struct SexprParser {
  const std::string& text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {  // comment to end of line
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  Sexpr parse() {
    skip_ws();
    if (pos >= text.size())
      throw SexprParseError("unexpected end of input at offset " + std::to_string(pos));
    if (text[pos] == '(') {
      ++pos;
      Sexpr node;
      while (true) {
        skip_ws();
        if (pos >= text.size())
          throw SexprParseError("unbalanced '(' at offset " + std::to_string(pos));
        if (text[pos] == ')') {
          ++pos;
          return node;
        }
        node.list.push_back(parse());
      }
    }
    if (text[pos] == ')')
      throw SexprParseError("unexpected ')' at offset " + std::to_string(pos));
    size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    Sexpr node;
    node.is_atom = true;
    node.atom = text.substr(start, pos - start);
    return node;
  }
};

std::string head(const Sexpr& s) {
  if (s.is_atom || s.list.empty() || !s.list[0].is_atom) return "";
  return s.list[0].atom;
}

GroundAtom atom_of(const Sexpr& s) {
  if (s.is_atom || s.list.empty() || !s.list[0].is_atom)
    throw SexprParseError("expected a ground atom");
  GroundAtom a{s.list[0].atom, {}};
  for (size_t i = 1; i < s.list.size(); ++i) {
    if (!s.list[i].is_atom) throw SexprParseError("nested list inside atom");
    a.args.push_back(s.list[i].atom);
  }
  return a;
}

const std::map<std::string, size_t>& predicate_arity() {
  static const std::map<std::string, size_t> table = {
      {"robot-in", 1}, {"object-room", 2}, {"agent-hold", 1}, {"hand-empty", 0},
      {"ontop", 2},    {"inside", 2},      {"closed", 1},     {"on-state", 1}};
  return table;
}

}  // namespace

Sexpr parse_sexpr(const std::string& text) {
  SexprParser p{text};
  Sexpr s = p.parse();
  p.skip_ws();
  if (p.pos != text.size())
    throw SexprParseError("trailing input at offset " + std::to_string(p.pos));
  return s;
}

const std::string& domain_text() {
  static const std::string text = kDomain;
  return text;
}

std::string GroundAtom::render() const {
  std::string out = "(" + predicate;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

std::string GroundStep::render() const {
  std::string out = "(" + action;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

std::string PddlProblem::render() const {
  std::ostringstream out;
  out << "(define (problem " << name << ")\n";
  out << "  (:domain instruction-following)\n";
  out << "  (:objects";
  for (const char* type : {"agent", "object", "room"}) {
    std::vector<std::string> names;
    for (const auto& [n, t] : constants)
      if (t == type) names.push_back(n);
    if (names.empty()) continue;
    out << "\n   ";
    for (const auto& n : names) out << " " << n;
    out << " - " << type;
  }
  out << ")\n";
  out << "  (:init";
  for (const auto& a : init) out << "\n    " << a.render();
  out << ")\n";
  out << "  (:goal (and";
  for (const auto& l : goal) {
    out << "\n    ";
    if (l.negated) out << "(not " << l.atom.render() << ")";
    else out << l.atom.render();
  }
  out << ")))\n";
  return out.str();
}

PddlProblem PddlProblem::parse(const std::string& text) {
  Sexpr root = parse_sexpr(text);
  if (head(root) != "define") throw SexprParseError("expected (define (problem ...) ...)");
  PddlProblem p;
  for (size_t i = 1; i < root.list.size(); ++i) {
    const Sexpr& section = root.list[i];
    std::string h = head(section);
    if (h == "problem") {
      if (section.list.size() > 1 && section.list[1].is_atom) p.name = section.list[1].atom;
    } else if (h == ":objects") {
      std::vector<std::string> pending;
      for (size_t j = 1; j < section.list.size(); ++j) {
        const Sexpr& tok = section.list[j];
        if (!tok.is_atom) throw SexprParseError("unexpected list in :objects");
        if (tok.atom == "-") {
          if (j + 1 >= section.list.size() || !section.list[j + 1].is_atom)
            throw SexprParseError(":objects type missing after '-'");
          std::string type = section.list[++j].atom;
          for (const auto& n : pending) p.constants[n] = type;
          pending.clear();
        } else {
          pending.push_back(tok.atom);
        }
      }
      for (const auto& n : pending) p.constants[n] = "object";
    } else if (h == ":init") {
      for (size_t j = 1; j < section.list.size(); ++j) p.init.insert(atom_of(section.list[j]));
    } else if (h == ":goal") {
      if (section.list.size() < 2) throw SexprParseError("empty :goal");
      const Sexpr& body = section.list[1];
      std::vector<const Sexpr*> literals;
      if (head(body) == "and") {
        for (size_t j = 1; j < body.list.size(); ++j) literals.push_back(&body.list[j]);
      } else {
        literals.push_back(&body);
      }
      for (const Sexpr* lit : literals) {
        if (head(*lit) == "not") {
          if (lit->list.size() != 2) throw SexprParseError("(not ...) takes one atom");
          p.goal.push_back({atom_of(lit->list[1]), true});
        } else {
          p.goal.push_back({atom_of(*lit), false});
        }
      }
    }
  }
  return p;
}

PddlProblem compile_problem(const SceneGraph& g, const SceneGraph& goal) {
  PddlProblem p;
  p.name = "task";
  for (const auto& [id, _] : g.rooms) p.constants[id.pddl_text()] = "room";
  for (const auto& [id, _] : g.assets) p.constants[id.pddl_text()] = "object";
  for (const auto& [id, _] : g.objects) p.constants[id.pddl_text()] = "object";
  if (g.held) p.constants[g.held->id.pddl_text()] = "object";

  auto state_atoms = [&](const NodeId& id, const std::vector<std::string>& states,
                         std::set<GroundAtom>& into) {
    for (const auto& s : states) {
      if (s == "closed") into.insert({"closed", {id.pddl_text()}});
      if (s == "on") into.insert({"on-state", {id.pddl_text()}});
    }
  };

  p.init.insert({"robot-in", {g.agent.location.pddl_text()}});
  if (g.held) {
    p.init.insert({"agent-hold", {g.held->id.pddl_text()}});
    state_atoms(g.held->id, g.held->states, p.init);
  } else {
    p.init.insert({"hand-empty", {}});
  }
  for (const auto& [id, asset] : g.assets) {
    p.init.insert({"object-room", {id.pddl_text(), asset.room.pddl_text()}});
    state_atoms(id, asset.states, p.init);
  }
  for (const auto& [id, obj] : g.objects) {
    auto room = g.room_of(id);
    if (room) p.init.insert({"object-room", {id.pddl_text(), room->pddl_text()}});
    switch (obj.relation) {
      case Relation::ontop_of:
        p.init.insert({"ontop", {id.pddl_text(), obj.parent.pddl_text()}});
        break;
      case Relation::inside_of:
        p.init.insert({"inside", {id.pddl_text(), obj.parent.pddl_text()}});
        break;
      default:
        throw WireError("relation of '" + id.text() + "' has no domain predicate");
    }
    state_atoms(id, obj.states, p.init);
  }

  p.goal.push_back({{"robot-in", {goal.agent.location.pddl_text()}}, false});
  std::set<Literal> rest;
  auto has_state = [](const std::vector<std::string>& states, const char* s) {
    return std::find(states.begin(), states.end(), s) != states.end();
  };
  // Final closed/on states must hold even for otherwise-unchanged nodes:
  // an intermediate open would silently drop them from the end state.
  auto positive_states = [&](const NodeId& id, const std::vector<std::string>& states) {
    if (has_state(states, "closed")) rest.insert({{"closed", {id.pddl_text()}}, false});
    if (has_state(states, "on")) rest.insert({{"on-state", {id.pddl_text()}}, false});
  };
  for (const auto& [id, asset] : goal.assets) positive_states(id, asset.states);
  for (const auto& [id, obj] : goal.objects) positive_states(id, obj.states);
  for (const NodeId& id : diff_changed_nodes(g, goal)) {
    std::vector<std::string> before = g.states_of(id), after = goal.states_of(id);
    if (goal.held && goal.held->id == id) {
      rest.insert({{"agent-hold", {id.pddl_text()}}, false});
    } else if (auto it = goal.objects.find(id); it != goal.objects.end()) {
      const ObjectNode& obj = it->second;
      switch (obj.relation) {
        case Relation::ontop_of:
          rest.insert({{"ontop", {id.pddl_text(), obj.parent.pddl_text()}}, false});
          break;
        case Relation::inside_of:
          rest.insert({{"inside", {id.pddl_text(), obj.parent.pddl_text()}}, false});
          break;
        default:
          throw WireError("goal relation of '" + id.text() + "' has no domain predicate");
      }
    }
    if (!has_state(after, "closed") && has_state(before, "closed"))
      rest.insert({{"closed", {id.pddl_text()}}, true});
    if (!has_state(after, "on") && has_state(before, "on"))
      rest.insert({{"on-state", {id.pddl_text()}}, true});
  }
  p.goal.insert(p.goal.end(), rest.begin(), rest.end());
  return p;
}

std::vector<PddlFault> lint_problem(const std::string& text, const SceneGraph* world) {
  PddlProblem p = PddlProblem::parse(text);
  std::vector<PddlFault> faults;

  auto check_atom = [&](const GroundAtom& a, bool in_goal) {
    auto it = predicate_arity().find(a.predicate);
    if (it == predicate_arity().end()) {
      faults.push_back({"undefined-predicate", "'" + a.predicate + "' is not a domain predicate"});
      return;
    }
    if (a.args.size() != it->second) {
      faults.push_back({"arity", "'" + a.predicate + "' takes " + std::to_string(it->second) +
                                     " arguments, got " + std::to_string(a.args.size())});
      return;
    }
    for (const auto& arg : a.args) {
      if (!p.constants.count(arg))
        faults.push_back({"undeclared-constant", "'" + arg + "' is not declared in :objects"});
    }
    if (a.predicate == "inside" && a.args.size() == 2) {
      // Semantic check: the container must actually afford containment.
      try {
        NodeId dest = NodeId::parse(a.args[1], true);
        bool bad;
        if (world) {
          bad = world->has_node(dest) && !world->node_has_affordance(dest, "put_inside");
        } else {
          bad = dest.category == "floor";
        }
        if (bad)
          faults.push_back({"semantic-violation",
                            "'" + dest.text() + "' cannot contain objects" +
                                (in_goal ? " (goal)" : "")});
      } catch (const IdError&) {
        // Non-id constant; the undeclared-constant check covers it.
      }
    }
  };

  for (const auto& a : p.init) check_atom(a, false);
  for (const auto& l : p.goal) check_atom(l.atom, true);
  return faults;
}

namespace {

struct GroundAction {
  GroundStep step;
  std::vector<GroundAtom> pre_pos, pre_neg, add, del;
};

std::vector<GroundAction> ground_all(const PddlProblem& p) {
  std::vector<std::string> rooms, objects;
  for (const auto& [n, t] : p.constants) {
    if (t == "room") rooms.push_back(n);
    else if (t == "object") objects.push_back(n);
  }
  std::vector<GroundAction> out;

  for (const auto& from : rooms)
    for (const auto& to : rooms) {
      if (from == to) continue;
      GroundAction a;
      a.step = {"go_to", {from, to}};
      a.pre_pos = {{"robot-in", {from}}};
      a.add = {{"robot-in", {to}}};
      a.del = {{"robot-in", {from}}};
      out.push_back(a);
    }

  for (const auto& obj : objects)
    for (const auto& s : objects) {
      if (obj == s) continue;
      for (const auto& r : rooms) {
        std::vector<GroundAtom> common = {{"robot-in", {r}},
                                          {"object-room", {obj, r}},
                                          {"object-room", {s, r}},
                                          {"hand-empty", {}}};
        // (or ...) in the domain precondition compiles to two variants.
        GroundAction ontop;
        ontop.step = {"pick_up", {obj, s, r}};
        ontop.pre_pos = common;
        ontop.pre_pos.push_back({"ontop", {obj, s}});
        ontop.add = {{"agent-hold", {obj}}};
        ontop.del = {{"ontop", {obj, s}}, {"inside", {obj, s}}, {"hand-empty", {}}};
        out.push_back(ontop);

        GroundAction inside = ontop;
        inside.pre_pos = common;
        inside.pre_pos.push_back({"inside", {obj, s}});
        inside.pre_neg = {{"closed", {s}}};
        out.push_back(inside);

        GroundAction put_on;
        put_on.step = {"put_on", {obj, s, r}};
        put_on.pre_pos = {{"robot-in", {r}}, {"object-room", {s, r}}, {"agent-hold", {obj}}};
        put_on.add = {{"ontop", {obj, s}}, {"object-room", {obj, r}}, {"hand-empty", {}}};
        put_on.del = {{"agent-hold", {obj}}};
        out.push_back(put_on);

        GroundAction put_inside = put_on;
        put_inside.step = {"put_inside", {obj, s, r}};
        put_inside.pre_neg = {{"closed", {s}}};
        put_inside.add = {{"inside", {obj, s}}, {"object-room", {obj, r}}, {"hand-empty", {}}};
        out.push_back(put_inside);
      }
    }

  for (const auto& obj : objects)
    for (const auto& r : rooms) {
      std::vector<GroundAtom> located = {{"robot-in", {r}}, {"object-room", {obj, r}}};
      GroundAction on;
      on.step = {"turn_on", {obj, r}};
      on.pre_pos = located;
      on.pre_neg = {{"on-state", {obj}}};
      on.add = {{"on-state", {obj}}};
      out.push_back(on);

      GroundAction off;
      off.step = {"turn_off", {obj, r}};
      off.pre_pos = located;
      off.pre_pos.push_back({"on-state", {obj}});
      off.del = {{"on-state", {obj}}};
      out.push_back(off);

      GroundAction open;
      open.step = {"open", {obj, r}};
      open.pre_pos = located;
      open.pre_pos.push_back({"closed", {obj}});
      open.del = {{"closed", {obj}}};
      out.push_back(open);

      GroundAction close;
      close.step = {"close", {obj, r}};
      close.pre_pos = located;
      close.pre_neg = {{"closed", {obj}}};
      close.add = {{"closed", {obj}}};
      out.push_back(close);
    }

  std::sort(out.begin(), out.end(), [](const GroundAction& a, const GroundAction& b) {
    return a.step < b.step;
  });
  return out;
}

bool applicable(const std::set<GroundAtom>& state, const GroundAction& a) {
  for (const auto& atom : a.pre_pos)
    if (!state.count(atom)) return false;
  for (const auto& atom : a.pre_neg)
    if (state.count(atom)) return false;
  return true;
}

std::set<GroundAtom> apply_action(const std::set<GroundAtom>& state, const GroundAction& a) {
  std::set<GroundAtom> out = state;
  for (const auto& atom : a.del) out.erase(atom);
  for (const auto& atom : a.add) out.insert(atom);
  return out;
}

std::string state_key(const std::set<GroundAtom>& state) {
  std::string key;
  for (const auto& a : state) {
    key += a.render();
    key += ';';
  }
  return key;
}

}  // namespace

bool goal_satisfied(const std::set<GroundAtom>& state, const std::vector<Literal>& goal) {
  for (const auto& l : goal) {
    bool present = state.count(l.atom) > 0;
    if (present == l.negated) return false;
  }
  return true;
}

SolveResult solve(const PddlProblem& problem, long budget) {
  std::vector<GroundAction> actions = ground_all(problem);

  SolveResult result;
  struct Node {
    std::set<GroundAtom> state;
    long parent = -1;
    int via = -1;  // index into actions
  };
  std::vector<Node> nodes;
  std::set<std::string> visited;
  std::deque<long> queue;

  nodes.push_back({problem.init, -1, -1});
  visited.insert(state_key(problem.init));
  queue.push_back(0);

  while (!queue.empty()) {
    long cur = queue.front();
    queue.pop_front();

    if (goal_satisfied(nodes[cur].state, problem.goal)) {
      std::vector<GroundStep> steps;
      for (long n = cur; nodes[n].via >= 0; n = nodes[n].parent)
        steps.push_back(actions[nodes[n].via].step);
      std::reverse(steps.begin(), steps.end());
      result.status = SolveStatus::solved;
      result.plan.steps = std::move(steps);
      return result;
    }
    if (++result.expanded > budget) {
      result.status = SolveStatus::budget_exceeded;
      return result;
    }
    for (size_t i = 0; i < actions.size(); ++i) {
      if (!applicable(nodes[cur].state, actions[i])) continue;
      std::set<GroundAtom> next = apply_action(nodes[cur].state, actions[i]);
      std::string key = state_key(next);
      if (!visited.insert(key).second) continue;
      nodes.push_back({std::move(next), cur, static_cast<int>(i)});
      queue.push_back(static_cast<long>(nodes.size()) - 1);
    }
  }
  result.status = SolveStatus::unsolvable;
  return result;
}

namespace {

// Rebuilds the ground action(s) matching a step for the STRIPS checker.
std::vector<GroundAction> variants_of(const GroundStep& step) {
  std::vector<GroundAction> out;
  const auto& a = step.args;
  auto bad = [&](size_t n) { return a.size() != n; };
  if (step.action == "go_to") {
    if (bad(2)) throw SexprParseError("go_to takes 2 arguments");
    GroundAction g;
    g.step = step;
    g.pre_pos = {{"robot-in", {a[0]}}};
    g.add = {{"robot-in", {a[1]}}};
    g.del = {{"robot-in", {a[0]}}};
    out.push_back(g);
  } else if (step.action == "pick_up") {
    if (bad(3)) throw SexprParseError("pick_up takes 3 arguments");
    std::vector<GroundAtom> common = {{"robot-in", {a[2]}},
                                      {"object-room", {a[0], a[2]}},
                                      {"object-room", {a[1], a[2]}},
                                      {"hand-empty", {}}};
    GroundAction ontop;
    ontop.step = step;
    ontop.pre_pos = common;
    ontop.pre_pos.push_back({"ontop", {a[0], a[1]}});
    ontop.add = {{"agent-hold", {a[0]}}};
    ontop.del = {{"ontop", {a[0], a[1]}}, {"inside", {a[0], a[1]}}, {"hand-empty", {}}};
    out.push_back(ontop);
    GroundAction inside = ontop;
    inside.pre_pos = common;
    inside.pre_pos.push_back({"inside", {a[0], a[1]}});
    inside.pre_neg = {{"closed", {a[1]}}};
    out.push_back(inside);
  } else if (step.action == "put_on" || step.action == "put_inside") {
    if (bad(3)) throw SexprParseError(step.action + " takes 3 arguments");
    GroundAction g;
    g.step = step;
    g.pre_pos = {{"robot-in", {a[2]}}, {"object-room", {a[1], a[2]}}, {"agent-hold", {a[0]}}};
    g.del = {{"agent-hold", {a[0]}}};
    if (step.action == "put_on") {
      g.add = {{"ontop", {a[0], a[1]}}, {"object-room", {a[0], a[2]}}, {"hand-empty", {}}};
    } else {
      g.pre_neg = {{"closed", {a[1]}}};
      g.add = {{"inside", {a[0], a[1]}}, {"object-room", {a[0], a[2]}}, {"hand-empty", {}}};
    }
    out.push_back(g);
  } else if (step.action == "turn_on" || step.action == "turn_off" ||
             step.action == "open" || step.action == "close") {
    if (bad(2)) throw SexprParseError(step.action + " takes 2 arguments");
    GroundAction g;
    g.step = step;
    g.pre_pos = {{"robot-in", {a[1]}}, {"object-room", {a[0], a[1]}}};
    if (step.action == "turn_on") {
      g.pre_neg = {{"on-state", {a[0]}}};
      g.add = {{"on-state", {a[0]}}};
    } else if (step.action == "turn_off") {
      g.pre_pos.push_back({"on-state", {a[0]}});
      g.del = {{"on-state", {a[0]}}};
    } else if (step.action == "open") {
      g.pre_pos.push_back({"closed", {a[0]}});
      g.del = {{"closed", {a[0]}}};
    } else {
      g.pre_neg = {{"closed", {a[0]}}};
      g.add = {{"closed", {a[0]}}};
    }
    out.push_back(g);
  } else {
    throw SexprParseError("unknown action '" + step.action + "'");
  }
  return out;
}

}  // namespace

bool step_applicable(const std::set<GroundAtom>& state, const GroundStep& step) {
  for (const auto& v : variants_of(step))
    if (applicable(state, v)) return true;
  return false;
}

std::set<GroundAtom> step_apply(const std::set<GroundAtom>& state, const GroundStep& step) {
  for (const auto& v : variants_of(step))
    if (applicable(state, v)) return apply_action(state, v);
  throw PreconditionViolation("step not applicable: " + step.render());
}

std::vector<Action> translate_plan(const GroundPlan& plan, const SceneGraph& g) {
  std::vector<Action> out;
  auto resolve = [&](const std::string& wire) {
    NodeId id = NodeId::parse(wire, true);
    if (!g.has_node(id)) throw UnknownNodeError("unknown node: " + id.text());
    return id;
  };
  for (const auto& step : plan.steps) {
    const auto& a = step.args;
    if (step.action == "go_to") {
      out.push_back({ActionKind::go_to, resolve(a.at(1))});
    } else if (step.action == "pick_up") {
      out.push_back({ActionKind::pick_up, resolve(a.at(0))});
    } else if (step.action == "put_on") {
      out.push_back({ActionKind::put_on, resolve(a.at(1))});
    } else if (step.action == "put_inside") {
      out.push_back({ActionKind::put_inside, resolve(a.at(1))});
    } else if (step.action == "turn_on") {
      out.push_back({ActionKind::turn_on, resolve(a.at(0))});
    } else if (step.action == "turn_off") {
      out.push_back({ActionKind::turn_off, resolve(a.at(0))});
    } else if (step.action == "open") {
      out.push_back({ActionKind::open, resolve(a.at(0))});
    } else if (step.action == "close") {
      out.push_back({ActionKind::close, resolve(a.at(0))});
    } else {
      throw SexprParseError("untranslatable action '" + step.action + "'");
    }
  }
  return out;
}

GroundStep ground_of(const Action& a, const SceneGraph& before) {
  switch (a.kind) {
    case ActionKind::go_to:
      return {"go_to", {before.agent.location.pddl_text(), a.target.pddl_text()}};
    case ActionKind::pick_up: {
      auto parent = before.parent_of(a.target);
      auto room = before.room_of(a.target);
      if (!parent || !room)
        throw UnknownNodeError("cannot ground pick_up of '" + a.target.text() + "'");
      return {"pick_up", {a.target.pddl_text(), parent->pddl_text(), room->pddl_text()}};
    }
    case ActionKind::put_on:
    case ActionKind::put_inside: {
      if (!before.agent.holding)
        throw PreconditionViolation("grounding a put with an empty hand");
      const char* name = a.kind == ActionKind::put_on ? "put_on" : "put_inside";
      return {name, {before.agent.holding->pddl_text(), a.target.pddl_text(),
                     before.agent.location.pddl_text()}};
    }
    case ActionKind::turn_on:
    case ActionKind::turn_off:
    case ActionKind::open:
    case ActionKind::close:
      return {action_kind_name(a.kind),
              {a.target.pddl_text(), before.agent.location.pddl_text()}};
    default:
      throw WireError("action '" + a.text() + "' has no domain counterpart");
  }
}

}  // namespace lpg::pddl
