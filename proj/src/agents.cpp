#include "lpg/agents.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "lpg/augmentation.hpp"
#include "lpg/errors.hpp"
#include "lpg/hash.hpp"
#include "lpg/pddl.hpp"
#include "lpg/prompts.hpp"
#include "lpg/simulator.hpp"

namespace lpg::agents {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string feedback_status_name(FeedbackStatus s) {
  switch (s) {
    case FeedbackStatus::ok: return "ok";
    case FeedbackStatus::hallucination: return "hallucination";
    case FeedbackStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

// First balanced {...} block in the text, tolerating prose around it.
std::optional<json> extract_json_object(const std::string& text) {
  size_t start = text.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}') {
        if (--depth == 0) {
          try {
            return json::parse(text.substr(start, i - start + 1));
          } catch (const json::parse_error&) {
            break;
          }
        }
      }
    }
    start = text.find('{', start + 1);
  }
  return std::nullopt;
}

std::string extract_reason(const std::string& text) {
  if (auto doc = extract_json_object(text))
    if (doc->contains("reason") && (*doc)["reason"].is_string())
      return (*doc)["reason"].get<std::string>();
  return "";
}

// The `plan` array of a JSON response, or a bare JSON array of strings.
std::vector<std::string> extract_plan_lines(const std::string& text) {
  json arr;
  if (auto doc = extract_json_object(text); doc && doc->contains("plan")) {
    arr = (*doc)["plan"];
  } else {
    size_t start = text.find('[');
    if (start == std::string::npos) throw ParseError("no plan found in response");
    size_t end = text.rfind(']');
    if (end == std::string::npos || end < start) throw ParseError("no plan found in response");
    try {
      arr = json::parse(text.substr(start, end - start + 1));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("plan is not valid JSON: ") + e.what());
    }
  }
  if (!arr.is_array()) throw ParseError("plan is not an array");
  std::vector<std::string> lines;
  for (const auto& item : arr) {
    if (!item.is_string()) throw ParseError("plan entries must be strings");
    lines.push_back(item.get<std::string>());
  }
  return lines;
}

ChatRequest one_shot_request(std::string user) {
  ChatRequest req;
  req.messages.push_back({"user", std::move(user), {}});
  return req;
}

ChatRequest system_user_request(const std::string& system, std::string user) {
  ChatRequest req;
  req.messages.push_back({"system", system, {}});
  req.messages.push_back({"user", std::move(user), {}});
  return req;
}

// Strict single-step gate used when correction is disabled: the rearrange
// macro still desugars to pick_up + put, but nothing is inserted.
std::variant<sim::CorrectedPlanStep, Feedback> bare_step(const SceneGraph& g, const Action& a,
                                                         const std::set<NodeId>* discovered) {
  if (a.kind != ActionKind::rearrange) {
    Feedback f = sim::check(g, a, discovered);
    if (!f.is_ok()) return f;
    return sim::CorrectedPlanStep{{a}};
  }
  if (Feedback f = sim::check(g, a, discovered); !f.is_ok()) return f;
  std::vector<Action> plan;
  if (!(g.agent.holding && *g.agent.holding == a.target))
    plan.push_back({ActionKind::pick_up, a.target});
  plan.push_back({*a.relation == Relation::inside_of ? ActionKind::put_inside
                                                     : ActionKind::put_on,
                  *a.destination});
  SceneGraph work = g;
  for (const Action& step : plan) {
    Feedback f = sim::check(work, step, discovered);
    if (!f.is_ok()) return f;
    work = sim::apply(work, step, discovered);
  }
  return sim::CorrectedPlanStep{plan};
}

// Propagates the true effect of an executed action into the believed graph,
// overriding whatever the stale map said about the touched nodes.
void sync_memory(MemoryGraph& memory, const SceneGraph& world, const Action& a) {
  switch (a.kind) {
    case ActionKind::go_to:
      memory.world.agent.location = world.agent.location;
      break;
    case ActionKind::pick_up:
      memory.world.objects.erase(a.target);
      memory.world.held = world.held;
      memory.world.agent.holding = world.agent.holding;
      memory.seen.insert(a.target);
      memory.unseen.erase(a.target);
      memory.interacted.insert(a.target);
      break;
    case ActionKind::put_on:
    case ActionKind::put_inside:
    case ActionKind::put_under:
    case ActionKind::attach: {
      if (!memory.world.held) break;
      NodeId placed = memory.world.held->id;
      memory.world.held.reset();
      memory.world.agent.holding.reset();
      if (auto it = world.objects.find(placed); it != world.objects.end())
        memory.world.objects[placed] = it->second;
      memory.seen.insert(placed);
      memory.interacted.insert(placed);
      memory.interacted.insert(a.target);
      break;
    }
    case ActionKind::open:
    case ActionKind::close:
    case ActionKind::turn_on:
    case ActionKind::turn_off: {
      std::vector<std::string> states = world.states_of(a.target);
      if (auto it = memory.world.assets.find(a.target); it != memory.world.assets.end())
        it->second.states = states;
      else if (ObjectNode* obj = memory.world.find_object(a.target))
        obj->states = states;
      memory.interacted.insert(a.target);
      break;
    }
    case ActionKind::discover_objects:
    case ActionKind::rearrange:
    case ActionKind::done:
      break;
  }
}

// Discovery of `asset`: either reveal the true contents directly or run the
// two-stage pipeline over a camera frame, then merge into the belief.
void augment(LmClient& lm, const EpisodeConfig& cfg, const SceneGraph& world,
             MemoryGraph& memory, const NodeId& asset, bool include_priors) {
  if (cfg.augmentation == AugmentationMode::oracle) {
    AugmentedSubgraph sg = oracle_reveal(world, asset);
    memory.apply_discovery(asset, to_observed(sg, asset));
    return;
  }
  auto it = cfg.asset_images.find(asset.text());
  if (it == cfg.asset_images.end())
    throw ConfigError("no camera frame configured for '" + asset.text() + "'");
  Observation obs;
  obs.asset = asset;
  obs.image_base64 = it->second;
  std::set<std::string> categories;
  for (const auto& [id, _] : memory.world.objects) categories.insert(id.category);
  if (memory.world.held) categories.insert(memory.world.held->id.category);
  obs.known_names.assign(categories.begin(), categories.end());
  if (include_priors)
    for (const NodeId& child : memory.world.children_of(asset))
      if (memory.world.is_object(child)) obs.priors.push_back(child);
  std::set<NodeId> existing;
  for (const auto& [id, _] : memory.world.rooms) existing.insert(id);
  for (const auto& [id, _] : memory.world.assets) existing.insert(id);
  for (const auto& [id, _] : memory.world.objects) existing.insert(id);
  std::string description = describe_stage(lm, obs);
  ParseOutcome out = parse_stage(lm, description, obs, existing);
  memory.apply_discovery(asset, to_observed(out.subgraph, asset));
}

std::string lpg_dynamic_prompt(const std::string& instruction, const MemoryGraph& memory,
                               const PromptViewOptions& opts,
                               const std::optional<std::pair<std::string, std::string>>& pending) {
  std::ostringstream out;
  out << "Instruction:\n" << instruction << "\n\n";
  out << "Scene description:\n" << memory.prompt_view(opts) << "\n";
  out << "Previous actions:\n";
  for (const auto& h : memory.history) {
    out << "\n";
    if (!h.reason.empty()) out << h.reason << "\n";
    out << "action: " << h.action_text << "\n";
  }
  if (pending) {
    out << "\nFeedback:\nYour previous response was:\n" << pending->first
        << "\nIt failed: " << pending->second << "\n";
  }
  return out.str();
}

void finish(EpisodeTrace& t, const SceneGraph& world, const TokenLedger& ledger) {
  t.final_world = world;
  t.planning_tokens = ledger.planning_tokens();
  t.augmentation_tokens = ledger.augmentation_tokens();
}

// Runs an already-parsed plan strictly: no retries, no correction, halt at
// the first precondition failure. Records everything on `step`.
void execute_strict(EpisodeTrace& t, TraceStep& step, SceneGraph& world,
                    const std::vector<Action>& plan, const EpisodeConfig& cfg) {
  std::set<NodeId> discovered;
  for (const Action& a : plan) {
    if (static_cast<int>(t.executed.size()) >= cfg.max_actions) {
      t.termination = eval::Termination::action_limit;
      return;
    }
    Feedback f = sim::check(world, a, &discovered);
    if (!f.is_ok()) {
      step.feedback = f;
      t.any_infeasible = true;
      t.note = "'" + a.text() + "' failed: " + f.message;
      return;
    }
    world = sim::apply(world, a, &discovered);
    if (a.kind == ActionKind::discover_objects) discovered.insert(a.target);
    t.executed.push_back(a);
    step.corrected.push_back(a);
  }
}

// Wraps an agent body with uniform backend-failure handling.
template <typename Fn>
EpisodeTrace guarded(const TokenLedger& ledger, SceneGraph& world, Fn&& body) {
  EpisodeTrace t;
  try {
    body(t);
  } catch (const ReplayExhausted& e) {
    t.termination = eval::Termination::replay_exhausted;
    t.note = e.what();
  } catch (const Error& e) {
    t.termination = eval::Termination::error;
    t.note = e.what();
  }
  finish(t, world, ledger);
  return t;
}

}  // namespace

std::string EpisodeTrace::dump_jsonl() const {
  std::ostringstream out;
  for (const auto& s : steps) {
    ordered_json line;
    line["prompt"] = s.prompt;
    line["response"] = s.response;
    line["parsed"] = s.parsed;
    line["feedback_status"] = feedback_status_name(s.feedback.status);
    line["feedback_category"] = feedback_category_name(s.feedback.category);
    line["feedback"] = s.feedback.message;
    ordered_json corrected = ordered_json::array();
    for (const Action& a : s.corrected) corrected.push_back(a.text());
    line["corrected"] = corrected;
    line["world_hash"] = s.world_hash;
    out << line.dump() << "\n";
  }
  ordered_json tail;
  ordered_json executed_arr = ordered_json::array();
  for (const Action& a : executed) executed_arr.push_back(a.text());
  tail["executed"] = executed_arr;
  tail["final_world_hash"] = graph_hash(final_world);
  tail["termination"] = eval::termination_name(termination);
  tail["any_infeasible"] = any_infeasible;
  tail["planning_tokens"] = planning_tokens;
  tail["augmentation_tokens"] = augmentation_tokens;
  tail["note"] = note;
  out << tail.dump() << "\n";
  return out.str();
}

std::string EpisodeTrace::hash() const { return sha256_hex(dump_jsonl()); }

eval::EpisodeOutcome EpisodeTrace::outcome() const {
  eval::EpisodeOutcome out;
  out.executed = executed;
  out.termination = termination;
  out.any_infeasible = any_infeasible;
  out.planning_tokens = planning_tokens;
  out.augmentation_tokens = augmentation_tokens;
  return out;
}

EpisodeTrace run_lookplangraph(const eval::TaskCase& task, Backend& backend,
                               const EpisodeConfig& cfg) {
  TokenLedger ledger;
  LmClient lm(backend, ledger);
  SceneGraph world = task.ground_truth.value_or(task.initial);
  MemoryGraph memory = MemoryGraph::init(task.initial);
  std::set<NodeId> discovered;

  return guarded(ledger, world, [&](EpisodeTrace& t) {
    const std::string& system = load_prompt("lookplangraph_static.txt");
    int failures = 0;
    std::optional<std::pair<std::string, std::string>> pending;

    while (true) {
      if (static_cast<int>(t.executed.size()) >= cfg.max_actions) {
        t.termination = eval::Termination::action_limit;
        return;
      }
      TraceStep step;
      step.prompt = lpg_dynamic_prompt(task.instruction, memory, cfg.prompt_options, pending);
      ChatResponse resp = lm.complete(system_user_request(system, step.prompt),
                                      CallTag::planning);
      step.response = resp.text;

      auto on_failure = [&](const Feedback& f) {
        step.feedback = f;
        pending = {resp.text, f.message};
        ++failures;
      };

      auto parsed = parse_action(resp.text, memory.world);
      if (std::holds_alternative<Feedback>(parsed)) {
        on_failure(std::get<Feedback>(parsed));
      } else {
        Action a = std::get<Action>(parsed);
        step.parsed = a.text();
        std::string reason = extract_reason(resp.text);

        if (a.kind == ActionKind::done) {
          memory.record_step(reason, a);
          t.executed.push_back(a);
          step.corrected = {a};
          step.world_hash = graph_hash(world);
          t.steps.push_back(step);
          t.termination = eval::Termination::done;
          return;
        }

        auto corrected = cfg.correction_enabled ? sim::correct(world, a, &discovered)
                                                : bare_step(world, a, &discovered);
        if (std::holds_alternative<Feedback>(corrected)) {
          on_failure(std::get<Feedback>(corrected));
        } else {
          pending.reset();
          failures = 0;
          memory.record_step(reason, a);
          bool hit_limit = false;
          for (const Action& prim : std::get<sim::CorrectedPlanStep>(corrected).actions) {
            if (static_cast<int>(t.executed.size()) >= cfg.max_actions) {
              hit_limit = true;
              break;
            }
            world = sim::apply(world, prim, &discovered);
            if (prim.kind == ActionKind::discover_objects) {
              discovered.insert(prim.target);
              augment(lm, cfg, world, memory, prim.target, /*include_priors=*/true);
            } else {
              sync_memory(memory, world, prim);
            }
            t.executed.push_back(prim);
            step.corrected.push_back(prim);
          }
          if (hit_limit) {
            step.world_hash = graph_hash(world);
            t.steps.push_back(step);
            t.termination = eval::Termination::action_limit;
            return;
          }
        }
      }
      step.world_hash = graph_hash(world);
      t.steps.push_back(step);
      if (failures >= cfg.max_consecutive_failures) {
        t.termination = eval::Termination::consecutive_failures;
        t.note = "gave up after " + std::to_string(failures) + " consecutive failures";
        return;
      }
    }
  });
}

EpisodeTrace run_llm_as_p(const eval::TaskCase& task, Backend& backend,
                          const EpisodeConfig& cfg) {
  TokenLedger ledger;
  LmClient lm(backend, ledger);
  SceneGraph world = task.ground_truth.value_or(task.initial);

  return guarded(ledger, world, [&](EpisodeTrace& t) {
    TraceStep step;
    step.prompt = render_template(load_prompt("llm_as_p.txt"),
                                  {{"INSTRUCTION", task.instruction},
                                   {"GRAPH_JSON", task.initial.serialize()}});
    ChatResponse resp = lm.complete(one_shot_request(step.prompt), CallTag::planning);
    step.response = resp.text;

    std::vector<Action> plan;
    try {
      for (const std::string& line : extract_plan_lines(resp.text)) {
        auto parsed = parse_action(line, task.initial);
        if (std::holds_alternative<Feedback>(parsed)) {
          const Feedback& f = std::get<Feedback>(parsed);
          step.feedback = f;
          t.termination = eval::Termination::error;
          t.note = "unparsable plan step '" + line + "': " + f.message;
          step.world_hash = graph_hash(world);
          t.steps.push_back(step);
          return;
        }
        plan.push_back(std::get<Action>(parsed));
      }
    } catch (const ParseError& e) {
      t.termination = eval::Termination::error;
      t.note = e.what();
      step.world_hash = graph_hash(world);
      t.steps.push_back(step);
      return;
    }

    execute_strict(t, step, world, plan, cfg);
    step.world_hash = graph_hash(world);
    t.steps.push_back(step);
  });
}

EpisodeTrace run_llm_p(const eval::TaskCase& task, Backend& backend, const EpisodeConfig& cfg) {
  TokenLedger ledger;
  LmClient lm(backend, ledger);
  SceneGraph world = task.ground_truth.value_or(task.initial);

  return guarded(ledger, world, [&](EpisodeTrace& t) {
    TraceStep step;
    step.prompt = render_template(load_prompt("llm_p.txt"),
                                  {{"DOMAIN", pddl::domain_text()},
                                   {"INSTRUCTION", task.instruction},
                                   {"GRAPH_JSON", task.initial.serialize()}});
    ChatResponse resp = lm.complete(one_shot_request(step.prompt), CallTag::planning);
    step.response = resp.text;
    step.world_hash = graph_hash(world);

    // The response is a problem PDDL file, possibly fenced.
    size_t start = resp.text.find("(define");
    if (start == std::string::npos) {
      t.termination = eval::Termination::error;
      t.note = "response contains no PDDL problem";
      t.steps.push_back(step);
      return;
    }
    std::string problem_text = resp.text.substr(start);
    if (size_t fence = problem_text.find("```"); fence != std::string::npos)
      problem_text.resize(fence);

    std::vector<pddl::PddlFault> faults;
    pddl::PddlProblem problem;
    try {
      faults = pddl::lint_problem(problem_text, &task.initial);
      problem = pddl::PddlProblem::parse(problem_text);
    } catch (const Error& e) {
      t.termination = eval::Termination::error;
      t.note = e.what();
      t.steps.push_back(step);
      return;
    }
    if (!faults.empty()) {
      t.termination = eval::Termination::error;
      std::ostringstream msg;
      for (const auto& f : faults) msg << f.kind << ": " << f.detail << "; ";
      t.note = msg.str();
      t.steps.push_back(step);
      return;
    }

    pddl::SolveResult solved = pddl::solve(problem);
    if (solved.status != pddl::SolveStatus::solved) {
      t.termination = eval::Termination::error;
      t.note = solved.status == pddl::SolveStatus::unsolvable ? "problem is unsolvable"
                                                              : "planner budget exceeded";
      t.steps.push_back(step);
      return;
    }
    std::vector<Action> plan = pddl::translate_plan(solved.plan, task.initial);
    step.parsed = std::to_string(plan.size()) + "-step plan";
    execute_strict(t, step, world, plan, cfg);
    step.world_hash = graph_hash(world);
    t.steps.push_back(step);
  });
}

std::string render_search_view(const SceneGraph& g, const std::set<NodeId>& expanded) {
  std::ostringstream out;
  out << "Building has the following places: ";
  size_t i = 0;
  for (const auto& [id, _] : g.rooms) {
    if (i++) out << ", ";
    out << id.text();
  }
  out << ".\n";
  out << "You are located in " << g.agent.location.text() << " and holding "
      << (g.agent.holding ? g.agent.holding->text() : "nothing") << ".\n";

  auto states_clause = [](const std::vector<std::string>& states) {
    if (states.empty()) return std::string();
    std::string s = " in states ";
    for (size_t j = 0; j < states.size(); ++j) {
      if (j) s += ", ";
      s += states[j];
    }
    return s;
  };

  for (const NodeId& room : expanded) {
    if (!g.rooms.count(room)) continue;
    out << "\nIn " << room.text() << " you see:\n";
    for (const auto& [id, asset] : g.assets)
      if (asset.room == room) out << id.text() << states_clause(asset.states) << "\n";
    for (const auto& [id, obj] : g.objects) {
      auto obj_room = g.room_of(id);
      if (obj_room && *obj_room == room)
        out << id.text() << " " << relation_short_name(obj.relation) << " "
            << obj.parent.text() << states_clause(obj.states) << "\n";
    }
  }
  return out.str();
}

EpisodeTrace run_sayplan_lite(const eval::TaskCase& task, Backend& backend,
                              const EpisodeConfig& cfg) {
  TokenLedger ledger;
  LmClient lm(backend, ledger);
  SceneGraph world = task.ground_truth.value_or(task.initial);

  return guarded(ledger, world, [&](EpisodeTrace& t) {
    std::set<NodeId> expanded;
    std::string previous_action = "none";
    bool verified = false;

    for (int call = 0; call < cfg.search_budget && !verified; ++call) {
      TraceStep step;
      step.prompt = "Instruction:\n" + task.instruction + "\n\nGraph:\n" +
                    render_search_view(task.initial, expanded) +
                    "\nPrevious search action: " + previous_action + "\n";
      ChatResponse resp = lm.complete(
          system_user_request(load_prompt("sayplan_search.txt"), step.prompt),
          CallTag::planning);
      step.response = resp.text;
      step.world_hash = graph_hash(world);

      auto doc = extract_json_object(resp.text);
      std::string command, node;
      if (doc && doc->contains("command") && (*doc)["command"].is_object()) {
        const json& cmd = (*doc)["command"];
        command = cmd.value("command_name", "");
        node = cmd.value("node_name", "");
      }
      if (command == "verify_plan") {
        verified = true;
        previous_action = "verify_plan()";
        step.parsed = previous_action;
      } else if (command == "expand_node" || command == "contract_node") {
        previous_action = command + "(" + node + ")";
        step.parsed = previous_action;
        try {
          NodeId room = NodeId::parse(node, true);
          if (!task.initial.rooms.count(room)) {
            step.feedback = Feedback::hallucination(FeedbackCategory::wrong_node_type,
                                                    "'" + node + "' is not a room");
          } else if (command == "expand_node") {
            expanded.insert(room);
          } else {
            expanded.erase(room);
          }
        } catch (const IdError& e) {
          step.feedback =
              Feedback::hallucination(FeedbackCategory::malformed_id, e.what());
        }
      } else {
        step.feedback = Feedback::hallucination(FeedbackCategory::invalid_function,
                                                "unknown search command");
      }
      t.steps.push_back(step);
    }

    if (!verified) {
      t.termination = eval::Termination::action_limit;
      t.note = "search budget exhausted without verify_plan";
      return;
    }

    TraceStep step;
    step.prompt = "Instruction:\n" + task.instruction + "\n\nGraph:\n" +
                  render_search_view(task.initial, expanded) + "\n";
    ChatResponse resp = lm.complete(
        system_user_request(load_prompt("sayplan_plan.txt"), step.prompt),
        CallTag::planning);
    step.response = resp.text;

    std::vector<Action> plan;
    try {
      for (const std::string& line : extract_plan_lines(resp.text)) {
        auto parsed = parse_action(line, task.initial);
        if (std::holds_alternative<Feedback>(parsed)) {
          const Feedback& f = std::get<Feedback>(parsed);
          step.feedback = f;
          t.termination = eval::Termination::error;
          t.note = "unparsable plan step '" + line + "': " + f.message;
          step.world_hash = graph_hash(world);
          t.steps.push_back(step);
          return;
        }
        plan.push_back(std::get<Action>(parsed));
      }
    } catch (const ParseError& e) {
      t.termination = eval::Termination::error;
      t.note = e.what();
      step.world_hash = graph_hash(world);
      t.steps.push_back(step);
      return;
    }
    execute_strict(t, step, world, plan, cfg);
    step.world_hash = graph_hash(world);
    t.steps.push_back(step);
  });
}

namespace {

// "> pick up cup-1" -> ("pick up", "cup-1"); think/done have no argument.
std::pair<std::string, std::string> split_react_line(std::string line) {
  while (!line.empty() && (line.front() == '>' || line.front() == ' ')) line.erase(0, 1);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  if (line.rfind("think", 0) == 0) return {"think", ""};
  if (line.rfind("done", 0) == 0) return {"done", ""};
  for (const char* verb : {"go to", "pick up", "put inside", "put on", "turn on", "turn off",
                           "open", "close"}) {
    std::string prefix = std::string(verb) + " ";
    if (line.rfind(prefix, 0) == 0) return {verb, line.substr(prefix.size())};
  }
  return {"", line};
}

const std::map<std::string, std::string, std::less<>> kReactVerbs = {
    {"pick up", "pick_up"}, {"put on", "put_on"},   {"put inside", "put_inside"},
    {"turn on", "turn_on"}, {"turn off", "turn_off"}, {"open", "open"},
    {"close", "close"}};

}  // namespace

EpisodeTrace run_react(const eval::TaskCase& task, Backend& backend, const EpisodeConfig& cfg) {
  TokenLedger ledger;
  LmClient lm(backend, ledger);
  SceneGraph world = task.ground_truth.value_or(task.initial);
  std::set<NodeId> discovered;

  return guarded(ledger, world, [&](EpisodeTrace& t) {
    std::ostringstream transcript;
    transcript << "You are in environment with following places: ";
    size_t i = 0;
    for (const auto& [id, _] : world.rooms) {
      if (i++) transcript << ", ";
      transcript << id.text();
    }
    transcript << ".\n";
    transcript << "You are in middle of " << world.agent.location.text() << "\n";
    transcript << "Your task is: " << task.instruction << "\n";

    const int turn_cap = cfg.max_actions * 2;
    for (int turn = 0; turn < turn_cap; ++turn) {
      if (static_cast<int>(t.executed.size()) >= cfg.max_actions) {
        t.termination = eval::Termination::action_limit;
        return;
      }
      TraceStep step;
      step.prompt = transcript.str();
      ChatResponse resp = lm.complete(
          system_user_request(load_prompt("react_static.txt"), step.prompt),
          CallTag::planning);
      step.response = resp.text;

      std::string first_line = resp.text.substr(0, resp.text.find('\n'));
      auto [verb, arg] = split_react_line(first_line);
      if (resp.text.rfind(">", 0) == 0)
        transcript << resp.text << "\n";
      else
        transcript << "> " << resp.text << "\n";

      std::string observation;
      if (verb == "think") {
        observation = "OK.";
        step.parsed = "think";
      } else if (verb == "done") {
        step.parsed = "done(agent-1)";
        t.executed.push_back({ActionKind::done, world.agent.id});
        step.corrected = {{ActionKind::done, world.agent.id}};
        step.world_hash = graph_hash(world);
        t.steps.push_back(step);
        t.termination = eval::Termination::done;
        return;
      } else if (verb == "go to") {
        auto parsed = parse_action("go_to(" + arg + ")", world);
        bool is_room = false;
        NodeId target;
        if (std::holds_alternative<Action>(parsed)) {
          target = std::get<Action>(parsed).target;
          is_room = world.is_room(target);
        }
        if (std::holds_alternative<Feedback>(parsed)) {
          step.feedback = std::get<Feedback>(parsed);
          observation = "Nothing happens.";
        } else if (is_room) {
          Action a{ActionKind::go_to, target};
          step.parsed = a.text();
          Feedback f = sim::check(world, a, &discovered);
          step.feedback = f;
          if (f.is_ok()) {
            SceneGraph before = world;
            world = sim::apply(world, a, &discovered);
            t.executed.push_back(a);
            step.corrected = {a};
            observation = sim::alfworld_feedback(before, a, f);
          } else {
            observation = "Nothing happens.";
          }
        } else {
          // Walking up to an asset reveals what is on and inside it. ReAct
          // keeps no memory, so live augmentation runs without priors.
          Action a{ActionKind::discover_objects, target};
          step.parsed = a.text();
          if (discovered.count(target)) {
            observation = sim::alfworld_asset_observation(world, target);
          } else {
            Feedback f = sim::check(world, a, &discovered);
            step.feedback = f;
            if (f.is_ok()) {
              SceneGraph before = world;
              world = sim::apply(world, a, &discovered);
              discovered.insert(target);
              if (cfg.augmentation == AugmentationMode::live) {
                Observation obs;
                obs.asset = target;
                if (auto it = cfg.asset_images.find(target.text());
                    it != cfg.asset_images.end()) {
                  obs.image_base64 = it->second;
                  std::set<std::string> categories;
                  for (const auto& [id, _] : world.objects) categories.insert(id.category);
                  obs.known_names.assign(categories.begin(), categories.end());
                  std::set<NodeId> existing;
                  for (const auto& [id, _] : world.objects) existing.insert(id);
                  std::string description = describe_stage(lm, obs);
                  parse_stage(lm, description, obs, existing);
                }
              }
              t.executed.push_back(a);
              step.corrected = {a};
              observation = sim::alfworld_feedback(before, a, f);
            } else {
              observation = "Nothing happens.";
            }
          }
        }
      } else if (auto it = kReactVerbs.find(verb); it != kReactVerbs.end()) {
        auto parsed = parse_action(it->second + "(" + arg + ")", world);
        if (std::holds_alternative<Feedback>(parsed)) {
          step.feedback = std::get<Feedback>(parsed);
          observation = "Nothing happens.";
        } else {
          Action a = std::get<Action>(parsed);
          step.parsed = a.text();
          Feedback f = sim::check(world, a, &discovered);
          step.feedback = f;
          if (f.is_ok()) {
            SceneGraph before = world;
            world = sim::apply(world, a, &discovered);
            t.executed.push_back(a);
            step.corrected = {a};
            observation = sim::alfworld_feedback(before, a, f);
          } else {
            observation = "Nothing happens.";
          }
        }
      } else {
        step.feedback = Feedback::hallucination(FeedbackCategory::invalid_function,
                                                "unrecognized action '" + first_line + "'");
        observation = "Nothing happens.";
      }

      transcript << observation << "\n";
      step.world_hash = graph_hash(world);
      t.steps.push_back(step);
    }
    t.termination = eval::Termination::action_limit;
    t.note = "turn cap reached";
  });
}

std::optional<AgentFn> agent_by_name(const std::string& name) {
  if (name == "lookplangraph") return AgentFn(run_lookplangraph);
  if (name == "llm-as-p") return AgentFn(run_llm_as_p);
  if (name == "llm-p") return AgentFn(run_llm_p);
  if (name == "sayplan-lite") return AgentFn(run_sayplan_lite);
  if (name == "react") return AgentFn(run_react);
  return std::nullopt;
}

}  // namespace lpg::agents
