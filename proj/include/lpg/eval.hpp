#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpg/action.hpp"
#include "lpg/scene_graph.hpp"

namespace lpg::eval {

struct TaskCase {
  std::string id;
  std::string instruction;
  SceneGraph initial;
  SceneGraph goal;
  std::optional<SceneGraph> ground_truth;  // true placements for dynamic mode
  std::vector<std::string> reference_plan;  // raw action lines, may be empty
  std::filesystem::path dir;                // bundle directory
};

// Bundle layout: task.json (id, instruction, optional file overrides) next
// to initial.graph.json / goal.graph.json / truth.graph.json / plan.txt.
TaskCase load_task(const std::filesystem::path& bundle_dir);

// Dynamic-scenario generator: ground truth moves a fraction of the
// goal-relevant objects to other affordance-compatible parents, favoring
// other rooms; the initial graph (the agent's stale map) is untouched.
// Deterministic per seed. Throws NoCompatibleParent when stuck.
TaskCase perturb(const TaskCase& task, unsigned long long seed, double fraction = 1.0);

struct ObjectReq {
  std::string category;
  Relation relation = Relation::ontop_of;
  std::string dest_key;  // exact id text, or bare category when ambiguous
  bool dest_exact = false;
  auto operator<=>(const ObjectReq&) const = default;
};

struct StateReq {
  NodeId node;
  std::string state;
  auto operator<=>(const StateReq&) const = default;
};

struct GoalRequirement {
  std::vector<ObjectReq> object_reqs;
  std::vector<StateReq> state_reqs;
  size_t total() const { return object_reqs.size() + state_reqs.size(); }
};

// Count-based requirements from the initial/goal diff: category + relation +
// destination key per moved object, exact node states per state change.
GoalRequirement derive_requirements(const TaskCase& task);

enum class Termination { done, action_limit, consecutive_failures, replay_exhausted, error };
std::string termination_name(Termination t);

// The part of an episode the validator needs.
struct EpisodeOutcome {
  std::vector<Action> executed;  // corrected primitive actions, in order
  Termination termination = Termination::done;
  bool any_infeasible = false;
  long planning_tokens = 0;
  long augmentation_tokens = 0;
};

struct Verdict {
  bool success = false;
  double precision = 0.0;
  std::string note;  // first strict-execution failure, if any
};

// Strict re-execution from ground truth (or initial), then maximum
// matching of final placements against the requirements.
Verdict validate(const TaskCase& task, const EpisodeOutcome& outcome);

struct TaskRow {
  std::string task_id;
  bool success = false;
  double precision = 0.0;
  long planning_tokens = 0;
  long actions = 0;
  std::string termination;
  std::string note;
};

struct MetricsReport {
  long n = 0;
  long successes = 0;
  double sr = 0.0;
  double app = 0.0;
  std::optional<double> tpa;  // absent when no task succeeded
  std::vector<TaskRow> rows;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

MetricsReport compute_metrics(const std::vector<TaskRow>& rows);

}  // namespace lpg::eval
