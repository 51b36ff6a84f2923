#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lpg/action.hpp"
#include "lpg/scene_graph.hpp"

namespace lpg::pddl {

// Minimal S-expression tree: either an atom or a list.
struct Sexpr {
  bool is_atom = false;
  std::string atom;
  std::vector<Sexpr> list;
};

// Parses one S-expression; SexprParseError carries the byte offset.
Sexpr parse_sexpr(const std::string& text);

// The `instruction-following` domain, embedded as shipped.
const std::string& domain_text();

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;
  auto operator<=>(const GroundAtom&) const = default;
  std::string render() const;  // (pred a b)
};

struct Literal {
  GroundAtom atom;
  bool negated = false;
  auto operator<=>(const Literal&) const = default;
};

struct PddlProblem {
  std::string name;
  std::map<std::string, std::string> constants;  // name -> room|object|agent
  std::set<GroundAtom> init;
  std::vector<Literal> goal;

  std::string render() const;  // bit-stable under identical inputs
  static PddlProblem parse(const std::string& text);
};

// Flattens a scene graph pair to the domain's vocabulary. Goal atoms come
// from the nodes that differ between the two graphs; the agent's goal room
// is always included. Throws WireError for relations outside the domain.
PddlProblem compile_problem(const SceneGraph& g, const SceneGraph& goal);

struct PddlFault {
  std::string kind;  // undefined-predicate | arity | undeclared-constant | semantic-violation
  std::string detail;
};

// Static checks mirroring the baseline's common failure classes. When a
// graph is supplied, `inside` destinations are checked against real
// affordances; otherwise a floor-category heuristic applies.
std::vector<PddlFault> lint_problem(const std::string& text,
                                    const SceneGraph* world = nullptr);

struct GroundStep {
  std::string action;
  std::vector<std::string> args;
  auto operator<=>(const GroundStep&) const = default;
  std::string render() const;
};

struct GroundPlan {
  std::vector<GroundStep> steps;
  bool operator==(const GroundPlan&) const = default;
};

enum class SolveStatus { solved, unsolvable, budget_exceeded };

struct SolveResult {
  SolveStatus status = SolveStatus::unsolvable;
  GroundPlan plan;
  long expanded = 0;
};

// Breadth-first forward search with visited-state hashing; shortest plan,
// lexicographic tie-breaking. Budget caps expanded states.
SolveResult solve(const PddlProblem& problem, long budget = 200000);

// STRIPS semantics for one step, exposed so plans can be checked without
// going through the search.
bool step_applicable(const std::set<GroundAtom>& state, const GroundStep& step);
std::set<GroundAtom> step_apply(const std::set<GroundAtom>& state, const GroundStep& step);
bool goal_satisfied(const std::set<GroundAtom>& state, const std::vector<Literal>& goal);

// Wire ids (`water_glass1`) to simulator actions, 1:1 by position.
std::vector<Action> translate_plan(const GroundPlan& plan, const SceneGraph& g);

// The inverse mapping, reconstructing dropped parameters (source, room)
// from the state the action fires in.
GroundStep ground_of(const Action& a, const SceneGraph& before);

}  // namespace lpg::pddl
