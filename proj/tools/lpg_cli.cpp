// lpg: operator entry point. Subcommands:
//   run       one episode against a task bundle
//   eval      batch evaluation over a directory of bundles
//   augscore  F1 scoring of predicted subgraphs against ground truth
//   sg2pddl   compile / lint / solve for the PDDL bridge
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpg/agents.hpp"
#include "lpg/augmentation.hpp"
#include "lpg/errors.hpp"
#include "lpg/eval.hpp"
#include "lpg/gateway.hpp"
#include "lpg/pddl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitConfigError = 2;

struct CommonOpts {
  std::string agent = "lookplangraph";
  std::string backend = "replay";
  std::string script;
  bool no_correction = false;
  int max_actions = 50;
  std::string augmentation = "oracle";
  bool json_graph_prompt = false;
  bool full_graph_prompt = false;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--agent", opts.agent,
                  "lookplangraph|llm-as-p|llm-p|sayplan-lite|react")
      ->default_val(opts.agent);
  cmd->add_option("--backend", opts.backend, "live|replay|record")
      ->default_val(opts.backend);
  cmd->add_option("--script", opts.script,
                  "replay script to read (replay) or write (record)");
  cmd->add_flag("--no-correction", opts.no_correction,
                "disable rule-based correction (strict execution)");
  cmd->add_option("--max-actions", opts.max_actions, "episode action limit")
      ->default_val(opts.max_actions);
  cmd->add_option("--augmentation", opts.augmentation, "oracle|live")
      ->default_val(opts.augmentation);
  cmd->add_flag("--json-graph-prompt", opts.json_graph_prompt,
                "serialize the memory view as JSON in prompts");
  cmd->add_flag("--full-graph-prompt", opts.full_graph_prompt,
                "bypass room-scoped prompt filtering");
}

lpg::agents::EpisodeConfig episode_config(const CommonOpts& opts) {
  lpg::agents::EpisodeConfig cfg;
  cfg.max_actions = opts.max_actions;
  cfg.correction_enabled = !opts.no_correction;
  cfg.augmentation = opts.augmentation == "live"
                         ? lpg::agents::AugmentationMode::live
                         : lpg::agents::AugmentationMode::oracle;
  cfg.prompt_options.json_graph = opts.json_graph_prompt;
  cfg.prompt_options.full_graph = opts.full_graph_prompt;
  return cfg;
}

// Backend for one episode. `default_script` is the per-bundle fallback used
// by `eval` when no explicit --script is given.
std::unique_ptr<lpg::Backend> make_backend(const CommonOpts& opts,
                                           const fs::path& default_script) {
  if (opts.backend == "replay") {
    fs::path path = opts.script.empty() ? default_script : fs::path(opts.script);
    if (path.empty() || !fs::exists(path))
      throw lpg::ConfigError("replay backend needs a script file (looked for '" +
                             path.string() + "')");
    return lpg::make_replay_backend(lpg::ReplayScript::load(path));
  }
  if (opts.backend == "live") return lpg::make_http_backend(lpg::HttpBackendConfig::from_env());
  if (opts.backend == "record") {
    if (opts.script.empty())
      throw lpg::ConfigError("record backend needs --script for the output file");
    return lpg::make_record_backend(
        lpg::make_http_backend(lpg::HttpBackendConfig::from_env()), opts.script);
  }
  throw lpg::ConfigError("unknown backend '" + opts.backend + "'");
}

lpg::agents::AgentFn resolve_agent(const std::string& name) {
  auto fn = lpg::agents::agent_by_name(name);
  if (!fn)
    throw lpg::ConfigError(
        "unknown agent '" + name +
        "' (expected lookplangraph|llm-as-p|llm-p|sayplan-lite|react)");
  return *fn;
}

lpg::eval::TaskRow run_one(const lpg::eval::TaskCase& task,
                           const lpg::agents::AgentFn& agent, lpg::Backend& backend,
                           const lpg::agents::EpisodeConfig& cfg,
                           lpg::agents::EpisodeTrace* trace_out = nullptr) {
  lpg::agents::EpisodeTrace trace = agent(task, backend, cfg);
  lpg::eval::Verdict verdict = lpg::eval::validate(task, trace.outcome());
  lpg::eval::TaskRow row;
  row.task_id = task.id;
  row.success = verdict.success;
  row.precision = verdict.precision;
  row.planning_tokens = trace.planning_tokens;
  row.actions = static_cast<long>(trace.executed.size());
  row.termination = lpg::eval::termination_name(trace.termination);
  row.note = !verdict.note.empty() ? verdict.note : trace.note;
  if (trace_out) *trace_out = std::move(trace);
  return row;
}

int cmd_run(const std::string& task_dir, const CommonOpts& opts,
            const std::string& trace_path) {
  lpg::eval::TaskCase task = lpg::eval::load_task(task_dir);
  auto agent = resolve_agent(opts.agent);
  auto backend = make_backend(opts, task.dir / ("replay." + opts.agent + ".jsonl"));

  lpg::agents::EpisodeTrace trace;
  lpg::eval::TaskRow row = run_one(task, agent, *backend, episode_config(opts), &trace);

  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw lpg::ConfigError("cannot write trace file '" + trace_path + "'");
    out << trace.dump_jsonl();
  }
  std::cout << row.task_id << " " << (row.success ? "success" : "failure")
            << " precision=" << row.precision << " actions=" << row.actions
            << " planning_tokens=" << row.planning_tokens
            << " termination=" << row.termination;
  if (!row.note.empty()) std::cout << " note=\"" << row.note << "\"";
  std::cout << "\n";
  return row.success ? kExitSuccess : kExitTaskFailure;
}

int cmd_eval(const std::string& tasks_dir, const CommonOpts& opts,
             const std::string& report_path, int jobs, unsigned long long seed,
             double perturb_fraction) {
  std::vector<fs::path> bundles;
  for (const auto& entry : fs::directory_iterator(tasks_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "task.json"))
      bundles.push_back(entry.path());
  std::sort(bundles.begin(), bundles.end());

  if (bundles.empty())
    std::cerr << "warning: no task bundles under '" << tasks_dir << "'\n";

  auto agent = resolve_agent(opts.agent);
  lpg::agents::EpisodeConfig cfg = episode_config(opts);

  std::vector<lpg::eval::TaskRow> rows(bundles.size());
  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < bundles.size(); i = next.fetch_add(1)) {
      lpg::eval::TaskRow& row = rows[i];
      row.task_id = bundles[i].filename().string();
      try {
        lpg::eval::TaskCase task = lpg::eval::load_task(bundles[i]);
        if (perturb_fraction > 0.0)
          task = lpg::eval::perturb(task, seed, perturb_fraction);
        auto backend =
            make_backend(opts, bundles[i] / ("replay." + opts.agent + ".jsonl"));
        row = run_one(task, agent, *backend, cfg);
      } catch (const std::exception& e) {
        row.success = false;
        row.termination = "error";
        row.note = e.what();
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << row.task_id << ": " << e.what() << "\n";
      }
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  lpg::eval::MetricsReport report = lpg::eval::compute_metrics(rows);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw lpg::ConfigError("cannot write report '" + report_path + "'");
    out << report.to_json().dump(2) << "\n";
    fs::path csv = fs::path(report_path).replace_extension(".csv");
    std::ofstream csv_out(csv);
    csv_out << report.to_csv();
  }
  std::cout << "n=" << report.n << " sr=" << report.sr << " app=" << report.app
            << " tpa=";
  if (report.tpa) std::cout << *report.tpa;
  else std::cout << "n/a";
  std::cout << "\n";
  return kExitSuccess;
}

int cmd_augscore(const std::string& pred_dir, const std::string& truth_dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pred_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::cout << "name,f1_nodes,f1_edges,exact\n";
  int bad = 0;
  for (const fs::path& pred_path : files) {
    fs::path truth_path = fs::path(truth_dir) / pred_path.filename();
    try {
      std::ifstream pf(pred_path), tf(truth_path);
      if (!tf) throw lpg::SchemaError("no ground truth file " + truth_path.string());
      lpg::AugmentedSubgraph pred = lpg::subgraph_from_json(json::parse(pf));
      lpg::AugmentedSubgraph truth = lpg::subgraph_from_json(json::parse(tf));
      lpg::F1Result f1 = lpg::score_f1(pred, truth);
      std::cout << pred_path.filename().string() << "," << f1.f1_nodes << ","
                << f1.f1_edges << "," << (f1.exact ? 1 : 0) << "\n";
    } catch (const std::exception& e) {
      ++bad;
      std::cout << pred_path.filename().string() << ",error,error,0\n";
      std::cerr << pred_path.filename().string() << ": " << e.what() << "\n";
    }
  }
  return bad == 0 ? kExitSuccess : kExitTaskFailure;
}

std::string slurp_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw lpg::ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_sg2pddl_compile(const std::string& initial, const std::string& goal,
                        const std::string& out_path) {
  lpg::SceneGraph g = lpg::SceneGraph::parse(slurp_file(initial));
  lpg::SceneGraph target = lpg::SceneGraph::parse(slurp_file(goal));
  std::string text = lpg::pddl::compile_problem(g, target).render();
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw lpg::ConfigError("cannot write '" + out_path + "'");
    out << text;
  }
  return kExitSuccess;
}

int cmd_sg2pddl_lint(const std::string& problem, const std::string& graph) {
  std::string text = slurp_file(problem);
  lpg::SceneGraph g;
  const lpg::SceneGraph* gp = nullptr;
  if (!graph.empty()) {
    g = lpg::SceneGraph::parse(slurp_file(graph));
    gp = &g;
  }
  std::vector<lpg::pddl::PddlFault> faults = lpg::pddl::lint_problem(text, gp);
  for (const auto& f : faults) std::cout << f.kind << ": " << f.detail << "\n";
  return faults.empty() ? kExitSuccess : kExitTaskFailure;
}

int cmd_sg2pddl_solve(const std::string& problem, long budget) {
  lpg::pddl::PddlProblem p = lpg::pddl::PddlProblem::parse(slurp_file(problem));
  lpg::pddl::SolveResult result = lpg::pddl::solve(p, budget);
  switch (result.status) {
    case lpg::pddl::SolveStatus::solved:
      for (const auto& step : result.plan.steps) std::cout << step.render() << "\n";
      return kExitSuccess;
    case lpg::pddl::SolveStatus::unsolvable:
      std::cerr << "unsolvable (" << result.expanded << " states expanded)\n";
      return kExitTaskFailure;
    case lpg::pddl::SolveStatus::budget_exceeded:
      std::cerr << "budget exceeded after " << result.expanded << " states\n";
      return kExitTaskFailure;
  }
  return kExitTaskFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-graph planning agent toolkit"};
  app.require_subcommand(1);

  // run
  CommonOpts run_opts;
  std::string run_task, run_trace;
  CLI::App* run = app.add_subcommand("run", "run one episode on a task bundle");
  run->add_option("task", run_task, "task bundle directory")->required();
  add_common_flags(run, run_opts);
  run->add_option("--trace", run_trace, "write the episode trace (JSON lines)");

  // eval
  CommonOpts eval_opts;
  std::string eval_tasks, eval_report;
  int eval_jobs = 1;
  unsigned long long eval_seed = 0;
  double eval_perturb = 0.0;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a directory of bundles");
  eval_cmd->add_option("--tasks", eval_tasks, "directory of task bundles")->required();
  add_common_flags(eval_cmd, eval_opts);
  eval_cmd->add_option("--report", eval_report, "report JSON path (CSV written beside)");
  eval_cmd->add_option("--jobs", eval_jobs, "worker threads")->default_val(1);
  eval_cmd->add_option("--seed", eval_seed, "perturbation seed")->default_val(0);
  eval_cmd->add_option("--perturb", eval_perturb,
                       "fraction of goal objects to relocate in ground truth")
      ->default_val(0.0);

  // augscore
  std::string aug_pred, aug_truth;
  CLI::App* augscore = app.add_subcommand("augscore", "score predicted subgraphs");
  augscore->add_option("--pred", aug_pred, "directory of predicted subgraph JSON")
      ->required();
  augscore->add_option("--truth", aug_truth, "directory of ground-truth JSON")
      ->required();

  // sg2pddl
  CLI::App* sg2pddl = app.add_subcommand("sg2pddl", "PDDL bridge tooling");
  sg2pddl->require_subcommand(1);
  std::string pd_initial, pd_goal, pd_out, pd_problem, pd_graph;
  long pd_budget = 200000;
  CLI::App* compile = sg2pddl->add_subcommand("compile", "graphs -> problem file");
  compile->add_option("initial", pd_initial, "initial graph JSON")->required();
  compile->add_option("goal", pd_goal, "goal graph JSON")->required();
  compile->add_option("--out", pd_out, "output path (stdout when absent)");
  CLI::App* lint = sg2pddl->add_subcommand("lint", "static checks on a problem file");
  lint->add_option("problem", pd_problem, "problem PDDL file")->required();
  lint->add_option("--graph", pd_graph, "scene graph for affordance checks");
  CLI::App* solve = sg2pddl->add_subcommand("solve", "breadth-first plan search");
  solve->add_option("problem", pd_problem, "problem PDDL file")->required();
  solve->add_option("--budget", pd_budget, "state-expansion budget")
      ->default_val(pd_budget);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitSuccess : kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(run_task, run_opts, run_trace);
    if (eval_cmd->parsed())
      return cmd_eval(eval_tasks, eval_opts, eval_report, eval_jobs, eval_seed,
                      eval_perturb);
    if (augscore->parsed()) return cmd_augscore(aug_pred, aug_truth);
    if (sg2pddl->parsed()) {
      if (compile->parsed()) return cmd_sg2pddl_compile(pd_initial, pd_goal, pd_out);
      if (lint->parsed()) return cmd_sg2pddl_lint(pd_problem, pd_graph);
      if (solve->parsed()) return cmd_sg2pddl_solve(pd_problem, pd_budget);
    }
  } catch (const lpg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
