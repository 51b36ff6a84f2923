#include "lpg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "lpg/errors.hpp"
#include "lpg/simulator.hpp"

namespace lpg::eval {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

SceneGraph load_graph(const fs::path& path) {
  return SceneGraph::parse(slurp(path));
}

}  // namespace

TaskCase load_task(const fs::path& bundle_dir) {
  fs::path meta_path = bundle_dir / "task.json";
  json meta;
  try {
    meta = json::parse(slurp(meta_path));
  } catch (const json::parse_error& e) {
    throw SchemaError(meta_path.string() + ": " + e.what());
  }

  TaskCase task;
  task.dir = bundle_dir;
  task.id = meta.value("id", bundle_dir.filename().string());
  if (!meta.contains("instruction") || !meta["instruction"].is_string())
    throw SchemaError(meta_path.string() + ": missing instruction");
  task.instruction = meta["instruction"].get<std::string>();

  auto file_of = [&](const char* key, const char* fallback) {
    return bundle_dir / meta.value(key, fallback);
  };
  task.initial = load_graph(file_of("initial", "initial.graph.json"));
  task.goal = load_graph(file_of("goal", "goal.graph.json"));

  fs::path truth = file_of("ground_truth", "truth.graph.json");
  if (fs::exists(truth)) task.ground_truth = load_graph(truth);

  fs::path plan = file_of("plan", "plan.txt");
  if (fs::exists(plan)) {
    std::istringstream lines(slurp(plan));
    std::string line;
    while (std::getline(lines, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty() && line[0] != '#') task.reference_plan.push_back(line);
    }
  }

  // Shared universe between initial and goal.
  diff_changed_nodes(task.initial, task.goal);
  if (task.ground_truth) {
    const SceneGraph& gt = *task.ground_truth;
    if (gt.rooms != task.initial.rooms || gt.assets != task.initial.assets)
      throw SchemaError(task.id + ": ground truth may differ only in object placement");
    diff_changed_nodes(task.initial, gt);
  }
  return task;
}

TaskCase perturb(const TaskCase& task, unsigned long long seed, double fraction) {
  std::mt19937_64 rng(seed);
  TaskCase out = task;
  SceneGraph truth = task.ground_truth.value_or(task.initial);

  // Goal-relevant objects, in stable order.
  std::vector<NodeId> movable;
  for (const NodeId& id : diff_changed_nodes(task.initial, task.goal))
    if (truth.objects.count(id)) movable.push_back(id);
  std::shuffle(movable.begin(), movable.end(), rng);
  size_t count = static_cast<size_t>(std::ceil(fraction * double(movable.size())));
  movable.resize(std::min(count, movable.size()));
  std::sort(movable.begin(), movable.end());

  for (const NodeId& id : movable) {
    const ObjectNode& obj = truth.objects.at(id);
    auto home_room = truth.room_of(id);
    std::vector<NodeId> other_room, same_room;
    for (const auto& [aid, asset] : truth.assets) {
      if (aid == obj.parent) continue;
      if (!asset.has_affordance("put_on")) continue;
      auto room = truth.room_of(aid);
      (room != home_room ? other_room : same_room).push_back(aid);
    }
    // Cross-room placement preferred: it is what breaks stale plans.
    const std::vector<NodeId>& pool = other_room.empty() ? same_room : other_room;
    if (pool.empty())
      throw NoCompatibleParent("no compatible parent for '" + id.text() + "'");
    NodeId dest = pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)];
    ObjectNode& mut = truth.objects.at(id);
    mut.parent = dest;
    mut.relation = Relation::ontop_of;
  }
  truth.check_invariants();
  out.ground_truth = std::move(truth);
  return out;
}

GoalRequirement derive_requirements(const TaskCase& task) {
  GoalRequirement reqs;
  // How many nodes of each category could be a destination; one instance
  // means the exact id is unambiguous.
  std::map<std::string, int> category_count;
  for (const auto& [id, _] : task.goal.assets) ++category_count[id.category];
  for (const auto& [id, _] : task.goal.objects) ++category_count[id.category];

  for (const NodeId& id : diff_changed_nodes(task.initial, task.goal)) {
    const ObjectNode* before = task.initial.find_object(id);
    const ObjectNode* after = task.goal.find_object(id);
    if (before && after) {
      bool placement_changed =
          before->parent != after->parent || before->relation != after->relation ||
          (task.initial.held && task.initial.held->id == id) !=
              (task.goal.held && task.goal.held->id == id);
      if (placement_changed) {
        ObjectReq r;
        r.category = id.category;
        r.relation = after->relation;
        bool exact = category_count[after->parent.category] == 1;
        r.dest_key = exact ? after->parent.text() : after->parent.category;
        r.dest_exact = exact;
        reqs.object_reqs.push_back(r);
      }
      if (before->states != after->states)
        for (const auto& s : after->states) reqs.state_reqs.push_back({id, s});
    } else if (task.goal.assets.count(id)) {
      // Asset state change.
      for (const auto& s : task.goal.states_of(id)) reqs.state_reqs.push_back({id, s});
    }
  }
  std::sort(reqs.object_reqs.begin(), reqs.object_reqs.end());
  std::sort(reqs.state_reqs.begin(), reqs.state_reqs.end());
  return reqs;
}

namespace {

bool req_matches(const ObjectReq& r, const ObjectNode& obj) {
  if (obj.id.category != r.category) return false;
  if (obj.relation != r.relation) return false;
  if (r.dest_exact) return obj.parent.text() == r.dest_key;
  return obj.parent.category == r.dest_key;
}

// Maximum bipartite matching (augmenting paths) between requirements and
// final-state objects.
size_t match_requirements(const std::vector<ObjectReq>& reqs, const SceneGraph& final_state) {
  std::vector<const ObjectNode*> objects;
  for (const auto& [id, obj] : final_state.objects) objects.push_back(&obj);

  std::vector<std::vector<size_t>> adj(reqs.size());
  for (size_t i = 0; i < reqs.size(); ++i)
    for (size_t j = 0; j < objects.size(); ++j)
      if (req_matches(reqs[i], *objects[j])) adj[i].push_back(j);

  std::vector<long> owner(objects.size(), -1);
  std::vector<char> visited;
  std::function<bool(size_t)> try_assign = [&](size_t i) -> bool {
    for (size_t j : adj[i]) {
      if (visited[j]) continue;
      visited[j] = 1;
      if (owner[j] < 0 || try_assign(static_cast<size_t>(owner[j]))) {
        owner[j] = static_cast<long>(i);
        return true;
      }
    }
    return false;
  };
  size_t matched = 0;
  for (size_t i = 0; i < reqs.size(); ++i) {
    visited.assign(objects.size(), 0);
    if (try_assign(i)) ++matched;
  }
  return matched;
}

}  // namespace

Verdict validate(const TaskCase& task, const EpisodeOutcome& outcome) {
  GoalRequirement reqs = derive_requirements(task);
  SceneGraph world = task.ground_truth.value_or(task.initial);

  Verdict v;
  bool strict_ok = true;
  std::set<NodeId> discovered;
  for (const Action& a : outcome.executed) {
    Feedback f = sim::check(world, a, &discovered);
    if (!f.is_ok()) {
      strict_ok = false;
      v.note = "strict re-execution failed at '" + a.text() + "': " + f.message;
      break;
    }
    world = sim::apply(world, a, &discovered);
    if (a.kind == ActionKind::discover_objects) discovered.insert(a.target);
  }

  size_t satisfied = match_requirements(reqs.object_reqs, world);
  for (const auto& s : reqs.state_reqs)
    if (world.has_node(s.node) && world.node_has_state(s.node, s.state)) ++satisfied;

  v.precision = reqs.total() == 0 ? 1.0 : double(satisfied) / double(reqs.total());
  v.success = strict_ok && v.precision == 1.0 && !outcome.any_infeasible &&
              outcome.termination != Termination::action_limit &&
              outcome.termination != Termination::error;
  if (!strict_ok) v.success = false;
  return v;
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::done: return "done";
    case Termination::action_limit: return "action_limit";
    case Termination::consecutive_failures: return "consecutive_failures";
    case Termination::replay_exhausted: return "replay_exhausted";
    case Termination::error: return "error";
  }
  return "unknown";
}

MetricsReport compute_metrics(const std::vector<TaskRow>& rows) {
  MetricsReport report;
  report.rows = rows;
  report.n = static_cast<long>(rows.size());
  double precision_sum = 0.0;
  double tpa_sum = 0.0;
  long tpa_rows = 0;
  for (const auto& r : rows) {
    if (r.success) {
      ++report.successes;
      if (r.actions > 0) {
        tpa_sum += double(r.planning_tokens) / double(r.actions);
        ++tpa_rows;
      }
    }
    precision_sum += r.precision;
  }
  if (report.n > 0) {
    report.sr = double(report.successes) / double(report.n);
    report.app = precision_sum / double(report.n);
  }
  if (tpa_rows > 0) report.tpa = tpa_sum / double(tpa_rows);
  return report;
}

ordered_json MetricsReport::to_json() const {
  ordered_json doc;
  doc["n"] = n;
  doc["successes"] = successes;
  doc["sr"] = sr;
  doc["app"] = app;
  if (tpa) doc["tpa"] = *tpa;
  else doc["tpa"] = nullptr;
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back(ordered_json{{"task_id", r.task_id},
                               {"success", r.success},
                               {"precision", r.precision},
                               {"planning_tokens", r.planning_tokens},
                               {"actions", r.actions},
                               {"termination", r.termination},
                               {"note", r.note}});
  }
  doc["rows"] = arr;
  return doc;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out << "task_id,success,precision,planning_tokens,actions,termination\n";
  for (const auto& r : rows) {
    out << r.task_id << "," << (r.success ? 1 : 0) << "," << r.precision << ","
        << r.planning_tokens << "," << r.actions << "," << r.termination << "\n";
  }
  return out.str();
}

}  // namespace lpg::eval
