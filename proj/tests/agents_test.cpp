#include <doctest.h>

#include <set>
#include <variant>

#include <json.hpp>

#include "lpg/agents.hpp"
#include "lpg/errors.hpp"
#include "lpg/eval.hpp"
#include "lpg/pddl.hpp"
#include "lpg/prompts.hpp"
#include "lpg/simulator.hpp"
#include "test_util.hpp"

using namespace lpg;
using namespace lpg::agents;
using nlohmann::json;

namespace {

eval::TaskCase load(const std::string& name) {
  return eval::load_task(test::fixture_path("tasks/" + name));
}

std::unique_ptr<Backend> scripted(const std::vector<std::string>& responses) {
  ReplayScript script;
  for (const auto& text : responses)
    script.entries.push_back({std::nullopt, text, 400, 30});
  return make_replay_backend(std::move(script));
}

std::string lpg_turn(const std::string& reason, const std::string& fn, const std::string& node,
                     const std::string& relation = "", const std::string& dest = "") {
  json action = {{"function_name", fn}, {"node", node}};
  if (!relation.empty()) action["relation"] = relation;
  if (!dest.empty()) action["destination"] = dest;
  return json{{"reason", reason}, {"action", action}}.dump();
}

// Strict re-execution of a trace's primitives, the replayability oracle.
SceneGraph rerun(const SceneGraph& start, const std::vector<Action>& actions) {
  SceneGraph g = start;
  std::set<NodeId> discovered;
  for (const Action& a : actions) {
    Feedback f = sim::check(g, a, &discovered);
    CAPTURE(a.text());
    CAPTURE(f.message);
    REQUIRE(f.is_ok());
    g = sim::apply(g, a, &discovered);
    if (a.kind == ActionKind::discover_objects) discovered.insert(a.target);
  }
  return g;
}

}  // namespace

TEST_CASE("scripted coffee episode reaches the goal") {
  eval::TaskCase task = load("make_coffee");
  auto backend = make_replay_backend(
      ReplayScript::load(test::fixture_path("tasks/make_coffee/replay.lookplangraph.jsonl")));
  EpisodeTrace trace = run_lookplangraph(task, *backend);

  CHECK(trace.termination == eval::Termination::done);
  CHECK(trace.steps.size() == 7);
  REQUIRE(trace.executed.size() == 10);
  CHECK(trace.executed[0].text() == "go_to(kitchen-1)");
  CHECK(trace.executed[2].text() == "pick_up(cup-1)");
  CHECK(trace.executed[3].text() == "put_inside(coffee_machine-1)");
  CHECK(trace.executed[8].text() == "put_on(table-2)");

  const ObjectNode& cup = trace.final_world.objects.at(NodeId("cup", 1));
  CHECK(cup.parent == NodeId("table", 2));
  CHECK(cup.relation == Relation::ontop_of);

  eval::Verdict v = eval::validate(task, trace.outcome());
  CHECK(v.success);
  CHECK(v.precision == 1.0);
  CHECK(trace.planning_tokens == 7 * (420 + 45));
  CHECK(trace.augmentation_tokens == 0);  // oracle discovery costs nothing
  CHECK(rerun(task.initial, trace.executed) == trace.final_world);
}

TEST_CASE("done on an already satisfied task succeeds in one action") {
  eval::TaskCase task = load("make_coffee");
  task.goal = task.initial;
  auto backend = scripted({lpg_turn("Everything already matches the instruction.", "done",
                                    "agent-1")});
  EpisodeTrace trace = run_lookplangraph(task, *backend);
  CHECK(trace.termination == eval::Termination::done);
  CHECK(trace.executed.size() == 1);
  CHECK(eval::validate(task, trace.outcome()).success);
}

TEST_CASE("hallucination feedback is appended then dropped") {
  eval::TaskCase task = load("make_coffee");
  task.goal = task.initial;
  auto backend = scripted({
      lpg_turn("I will grab the ghost.", "pick_up", "ghost-9"),
      lpg_turn("That node does not exist; the task is already satisfied.", "done", "agent-1"),
  });
  EpisodeTrace trace = run_lookplangraph(task, *backend);
  REQUIRE(trace.steps.size() == 2);
  CHECK(trace.steps[0].feedback.status == FeedbackStatus::hallucination);
  CHECK(trace.steps[0].feedback.category == FeedbackCategory::unknown_node);
  // The re-prompt carries the failed response and its feedback...
  CHECK(trace.steps[1].prompt.find("Feedback:") != std::string::npos);
  CHECK(trace.steps[1].prompt.find("ghost-9") != std::string::npos);
  // ...and the first prompt did not.
  CHECK(trace.steps[0].prompt.find("Feedback:") == std::string::npos);
  CHECK(trace.termination == eval::Termination::done);
}

TEST_CASE("three consecutive failures end the episode") {
  eval::TaskCase task = load("make_coffee");
  std::string bad = lpg_turn("grab it", "pick_up", "ghost-9");
  auto backend = scripted({bad, bad, bad});
  EpisodeTrace trace = run_lookplangraph(task, *backend);
  CHECK(trace.termination == eval::Termination::consecutive_failures);
  CHECK(trace.executed.empty());
  CHECK(trace.steps.size() == 3);
}

TEST_CASE("rule correction inserts travel and opening; disabling it fails the same script") {
  eval::TaskCase task = load("recycle_glass");
  std::string rearrange =
      lpg_turn("Move the glass into the bin.", "rearrange", "water_glass-1", "inside",
               "recycling_bin-1");

  EpisodeTrace corrected =
      run_lookplangraph(task, *scripted({rearrange, lpg_turn("Task complete.", "done",
                                                             "agent-1")}));
  CHECK(corrected.termination == eval::Termination::done);
  std::vector<std::string> texts;
  for (const Action& a : corrected.executed) texts.push_back(a.text());
  CHECK(texts == std::vector<std::string>{"pick_up(water_glass-1)", "go_to(garden-1)",
                                          "open(recycling_bin-1)",
                                          "put_inside(recycling_bin-1)", "done(agent-1)"});
  CHECK(eval::validate(task, corrected.outcome()).success);

  EpisodeConfig no_correction;
  no_correction.correction_enabled = false;
  EpisodeTrace failed =
      run_lookplangraph(task, *scripted({rearrange, rearrange, rearrange}), no_correction);
  CHECK(failed.termination == eval::Termination::consecutive_failures);
  CHECK(failed.executed.empty());
  CHECK(!eval::validate(task, failed.outcome()).success);
}

TEST_CASE("stale map plus discovery solves the moved-object scenario") {
  eval::TaskCase task = eval::perturb(load("recycle_glass"), 7, 1.0);
  // Ground truth now has the glass in the garden while the agent's map
  // still claims floor-1 in the kitchen.
  REQUIRE(task.ground_truth->objects.at(NodeId("water_glass", 1)).parent ==
          NodeId("floor", 2));

  auto backend = scripted({
      lpg_turn("Check the floor where I remember the glass.", "discover_objects", "floor-1"),
      lpg_turn("Not here; the recycling bin is in the garden, look there.", "go_to",
               "garden-1"),
      lpg_turn("Inspect the garden floor.", "discover_objects", "floor-2"),
      lpg_turn("Found it; move it into the bin.", "rearrange", "water_glass-1", "inside",
               "recycling_bin-1"),
      lpg_turn("Glass recycled.", "done", "agent-1"),
  });
  EpisodeTrace trace = run_lookplangraph(task, *backend);
  CHECK(trace.termination == eval::Termination::done);
  CHECK(eval::validate(task, trace.outcome()).success);
  CHECK(rerun(*task.ground_truth, trace.executed) == trace.final_world);

  // The strict single-shot planner works from the stale map and fails.
  std::string stale_plan = json{
      {"plan", {"pick_up(water_glass-1)", "go_to(garden-1)", "open(recycling_bin-1)",
                "put_inside(recycling_bin-1)", "close(recycling_bin-1)"}}}.dump();
  EpisodeTrace strict = run_llm_as_p(task, *scripted({stale_plan}));
  CHECK(strict.any_infeasible);
  CHECK(!eval::validate(task, strict.outcome()).success);
}

TEST_CASE("single-call planner executes wire-form plans strictly") {
  eval::TaskCase task = load("recycle_glass");
  std::string response = "Here is the plan.\n" +
                         json{{"plan", {"pick_up(water_glass1)", "go_to(garden1)",
                                        "open(recycling_bin1)", "put_inside(recycling_bin1)",
                                        "close(recycling_bin1)"}}}.dump();
  EpisodeTrace trace = run_llm_as_p(task, *scripted({response}));
  CHECK(trace.termination == eval::Termination::done);
  CHECK(trace.executed.size() == 5);
  CHECK(!trace.any_infeasible);
  CHECK(eval::validate(task, trace.outcome()).success);
  CHECK(trace.planning_tokens == 430);

  EpisodeTrace empty = run_llm_as_p(task, *scripted({R"({"plan": []})"}));
  CHECK(empty.executed.empty());
  CHECK(!eval::validate(task, empty.outcome()).success);  // goal unmet

  EpisodeTrace garbage = run_llm_as_p(task, *scripted({"I cannot help with that."}));
  CHECK(garbage.termination == eval::Termination::error);
}

TEST_CASE("the shipped one-shot example plan solves its own example problem") {
  const std::string& tpl = load_prompt("llm_as_p.txt");
  size_t start = tpl.find("A plan for the example problem is:");
  size_t end = tpl.find("Now I have a new planning problem");
  REQUIRE(start != std::string::npos);
  REQUIRE(end != std::string::npos);
  json doc = json::parse(tpl.substr(start + 34, end - start - 34));

  eval::TaskCase task = load("recycle_glass");
  SceneGraph g = task.initial;
  std::set<NodeId> discovered;
  for (const auto& line : doc["plan"]) {
    auto parsed = parse_action(line.get<std::string>(), g);
    REQUIRE(std::holds_alternative<Action>(parsed));
    const Action& a = std::get<Action>(parsed);
    REQUIRE(sim::check(g, a, &discovered).is_ok());
    g = sim::apply(g, a, &discovered);
  }
  const ObjectNode& glass = g.objects.at(NodeId("water_glass", 1));
  CHECK(glass.relation == Relation::inside_of);
  CHECK(glass.parent == NodeId("recycling_bin", 1));
  CHECK(g.node_has_state(NodeId("recycling_bin", 1), "closed"));
  CHECK(g.agent.location == NodeId("garden", 1));
}

TEST_CASE("react replays the coffee transcript in 13 turns") {
  eval::TaskCase task = load("make_coffee");
  auto backend = make_replay_backend(
      ReplayScript::load(test::fixture_path("tasks/make_coffee/replay.react.jsonl")));
  EpisodeTrace trace = run_react(task, *backend);

  CHECK(trace.termination == eval::Termination::done);
  CHECK(trace.steps.size() == 13);
  const ObjectNode& cup = trace.final_world.objects.at(NodeId("cup", 1));
  CHECK(cup.parent == NodeId("table", 2));
  CHECK(eval::validate(task, trace.outcome()).success);

  const std::string& last = trace.steps.back().prompt;
  CHECK(last.find("You are in middle of kitchen-1. Looking quickly around you see "
                  "coffee_machine-1, counter-1, table-1.") != std::string::npos);
  CHECK(last.find("On the table-1 you see banana-1, cup-1, fork-1, plate-1.") !=
        std::string::npos);
  CHECK(last.find("You see turned off coffee_machine-1.") != std::string::npos);
  CHECK(last.find("You pick up cup-1 from table-1.") != std::string::npos);

  // Transcript growth: every prompt extends the previous one.
  for (size_t i = 1; i < trace.steps.size(); ++i)
    CHECK(trace.steps[i].prompt.rfind(trace.steps[i - 1].prompt, 0) == 0);

  CHECK(rerun(task.initial, trace.executed) == trace.final_world);
}

TEST_CASE("think turns leave the world unchanged") {
  eval::TaskCase task = load("make_coffee");
  auto backend = scripted({"> think: pondering the task at length.", "> done"});
  EpisodeTrace trace = run_react(task, *backend);
  REQUIRE(trace.steps.size() == 2);
  CHECK(trace.steps[0].world_hash == graph_hash(task.initial));
  CHECK(trace.steps[0].prompt.find("OK.") == std::string::npos);
  CHECK(trace.steps[1].prompt.find("OK.") != std::string::npos);
  CHECK(trace.final_world == task.initial);
}

TEST_CASE("lookplangraph and react agree on single-object tasks") {
  eval::TaskCase task = load("recycle_glass");
  EpisodeTrace lpg_trace = run_lookplangraph(
      task, *scripted({lpg_turn("Move the glass into the bin.", "rearrange", "water_glass-1",
                                "inside", "recycling_bin-1"),
                       lpg_turn("Task complete.", "done", "agent-1")}));
  EpisodeTrace react_trace = run_react(
      task, *scripted({"> pick up water_glass-1", "> go to garden-1",
                       "> open recycling_bin-1", "> put inside recycling_bin-1", "> done"}));
  CHECK(lpg_trace.termination == eval::Termination::done);
  CHECK(react_trace.termination == eval::Termination::done);
  CHECK(lpg_trace.final_world == react_trace.final_world);
}

TEST_CASE("search view expand then contract restores the collapsed rendering") {
  SceneGraph g = load("make_coffee").initial;
  std::string collapsed = render_search_view(g, {});
  CHECK(collapsed.find("kitchen-1") != std::string::npos);
  CHECK(collapsed.find("cup-1") == std::string::npos);

  std::set<NodeId> expanded = {NodeId("kitchen", 1)};
  std::string open_view = render_search_view(g, expanded);
  CHECK(open_view.find("cup-1 ontop table-1") != std::string::npos);

  expanded.erase(NodeId("kitchen", 1));
  CHECK(render_search_view(g, expanded) == collapsed);
}

TEST_CASE("sayplan lite searches, verifies, then plans") {
  eval::TaskCase task = load("make_coffee");
  std::string expand = json{
      {"chain_of_thought", {"the cup and machine should be in the kitchen"}},
      {"reasoning", "expand the kitchen"},
      {"command", {{"command_name", "expand_node"}, {"node_name", "kitchen1"}}}}.dump();
  std::string verify = json{
      {"chain_of_thought", {"all relevant objects found"}},
      {"reasoning", "the graph covers the task"},
      {"command", {{"command_name", "verify_plan"}, {"node_name", ""}}}}.dump();
  std::string plan = json{
      {"chain_of_thought", {"brew in the machine, deliver to the room"}},
      {"plan", {"go_to(kitchen-1)", "pick_up(cup-1)", "put_inside(coffee_machine-1)",
                "turn_on(coffee_machine-1)", "turn_off(coffee_machine-1)", "pick_up(cup-1)",
                "go_to(toms_room-1)", "put_on(table-2)"}}}.dump();

  EpisodeTrace trace = run_sayplan_lite(task, *scripted({expand, verify, plan}));
  CHECK(trace.termination == eval::Termination::done);
  CHECK(trace.executed.size() == 8);
  CHECK(eval::validate(task, trace.outcome()).success);
  // The second search prompt shows the expanded kitchen and only the
  // previous search action, not a growing history.
  CHECK(trace.steps[1].prompt.find("cup-1 ontop table-1") != std::string::npos);
  CHECK(trace.steps[1].prompt.find("Previous search action: expand_node(kitchen1)") !=
        std::string::npos);

  EpisodeConfig tight;
  tight.search_budget = 2;
  EpisodeTrace exhausted = run_sayplan_lite(task, *scripted({expand, expand}), tight);
  CHECK(exhausted.termination == eval::Termination::action_limit);
  CHECK(exhausted.executed.empty());
}

TEST_CASE("pddl pipeline solves a scripted problem file") {
  eval::TaskCase task = load("recycle_glass");
  std::string problem = pddl::compile_problem(task.initial, task.goal).render();
  EpisodeTrace trace = run_llm_p(task, *scripted({"```\n" + problem + "```"}));
  CHECK(trace.termination == eval::Termination::done);
  CHECK(!trace.any_infeasible);
  CHECK(eval::validate(task, trace.outcome()).success);

  EpisodeTrace garbage = run_llm_p(task, *scripted({"no pddl here"}));
  CHECK(garbage.termination == eval::Termination::error);

  std::string faulty = problem;
  size_t init = faulty.find("(:init");
  faulty.insert(init + 6, "\n    (on recycling_bin1)");
  EpisodeTrace linted = run_llm_p(task, *scripted({faulty}));
  CHECK(linted.termination == eval::Termination::error);
  CHECK(linted.note.find("undefined-predicate") != std::string::npos);
}

TEST_CASE("identical scripts produce identical trace hashes") {
  eval::TaskCase task = load("make_coffee");
  auto run = [&] {
    auto backend = make_replay_backend(
        ReplayScript::load(test::fixture_path("tasks/make_coffee/replay.lookplangraph.jsonl")));
    return run_lookplangraph(task, *backend);
  };
  EpisodeTrace a = run();
  EpisodeTrace b = run();
  CHECK(a.hash() == b.hash());
  CHECK(a.dump_jsonl() == b.dump_jsonl());
  CHECK(!a.hash().empty());
}

TEST_CASE("script exhaustion is reported as such") {
  eval::TaskCase task = load("make_coffee");
  EpisodeTrace trace = run_lookplangraph(
      task, *scripted({lpg_turn("head to the kitchen", "go_to", "kitchen-1")}));
  CHECK(trace.termination == eval::Termination::replay_exhausted);
  CHECK(trace.executed.size() == 1);
}

TEST_CASE("agents are resolvable by name") {
  for (const char* name : {"lookplangraph", "llm-as-p", "llm-p", "sayplan-lite", "react"})
    CHECK(agent_by_name(name).has_value());
  CHECK(!agent_by_name("autogpt").has_value());
}
