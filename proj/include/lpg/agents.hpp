#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpg/action.hpp"
#include "lpg/eval.hpp"
#include "lpg/gateway.hpp"
#include "lpg/memory_graph.hpp"
#include "lpg/scene_graph.hpp"

namespace lpg::agents {

enum class AugmentationMode { oracle, live };

struct EpisodeConfig {
  int max_actions = 50;
  int max_consecutive_failures = 3;
  bool correction_enabled = true;
  AugmentationMode augmentation = AugmentationMode::oracle;
  PromptViewOptions prompt_options;
  int search_budget = 20;  // SayPlan Lite search-phase call cap
  // Live augmentation: base64 camera frames keyed by asset id text.
  std::map<std::string, std::string> asset_images;
};

struct TraceStep {
  std::string prompt;        // the message added for this LM turn
  std::string response;      // raw LM text
  std::string parsed;        // canonical action text, empty if unparsable
  Feedback feedback;         // result of parse/check/correct
  std::vector<Action> corrected;  // primitives executed this turn
  std::string world_hash;    // graph hash after this turn
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  std::vector<Action> executed;  // all executed primitives, in order
  SceneGraph final_world;
  eval::Termination termination = eval::Termination::done;
  bool any_infeasible = false;
  long planning_tokens = 0;
  long augmentation_tokens = 0;
  std::string note;

  std::string dump_jsonl() const;
  // Stable digest over the step records; identical episodes hash equal.
  std::string hash() const;
  eval::EpisodeOutcome outcome() const;
};

EpisodeTrace run_lookplangraph(const eval::TaskCase& task, Backend& backend,
                               const EpisodeConfig& cfg = {});
EpisodeTrace run_llm_as_p(const eval::TaskCase& task, Backend& backend,
                          const EpisodeConfig& cfg = {});
EpisodeTrace run_llm_p(const eval::TaskCase& task, Backend& backend,
                       const EpisodeConfig& cfg = {});
EpisodeTrace run_sayplan_lite(const eval::TaskCase& task, Backend& backend,
                              const EpisodeConfig& cfg = {});
EpisodeTrace run_react(const eval::TaskCase& task, Backend& backend,
                       const EpisodeConfig& cfg = {});

using AgentFn = std::function<EpisodeTrace(const eval::TaskCase&, Backend&,
                                           const EpisodeConfig&)>;
// lookplangraph | llm-as-p | llm-p | sayplan-lite | react
std::optional<AgentFn> agent_by_name(const std::string& name);

// SayPlan Lite collapsed-graph rendering, exposed for the
// expand-then-contract equality check.
std::string render_search_view(const SceneGraph& g, const std::set<NodeId>& expanded);

}  // namespace lpg::agents
