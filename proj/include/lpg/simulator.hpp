#pragma once

#include <set>
#include <variant>
#include <vector>

#include "lpg/action.hpp"
#include "lpg/scene_graph.hpp"

namespace lpg {
namespace sim {

// The original action, possibly preceded by inserted prerequisites or the
// full rearrange expansion. Executing the list strictly from the
// triggering state violates no precondition.
struct CorrectedPlanStep {
  std::vector<Action> actions;
};

// Precondition check. `discovered` is the set of assets/objects already
// inspected this episode; when present it enables the redundant-discovery
// check for discover_objects.
Feedback check(const SceneGraph& g, const Action& a,
               const std::set<NodeId>* discovered = nullptr);

// Applies a checked action and returns the new graph; the input is
// unmodified. Throws PreconditionViolation if check() would not pass.
SceneGraph apply(const SceneGraph& g, const Action& a,
                 const std::set<NodeId>* discovered = nullptr);

// Rule-based correction: inserts go_to/open prerequisites and expands the
// rearrange macro. Uncorrectable failures come back as Feedback for
// re-prompting.
std::variant<CorrectedPlanStep, Feedback> correct(
    const SceneGraph& g, const Action& a, const std::set<NodeId>* discovered = nullptr);

// Renders the post-action observation in the ALFWorld text style.
// `g` is the state before the action. Failed actions render as
// "Nothing happens."
std::string alfworld_feedback(const SceneGraph& g, const Action& a, const Feedback& result);

// What the agent sees when it walks up to an asset.
std::string alfworld_asset_observation(const SceneGraph& g, const NodeId& asset);

}  // namespace sim
}  // namespace lpg
