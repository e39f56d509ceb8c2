#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "sopcc/instance.hpp"
#include "sopcc/rollout.hpp"

namespace sopcc {

/// Per-child (Q, F) estimate fed into the tree search.
struct ChildEval {
  double q = 0.0;
  double f = 0.0;
};

/// Pluggable evaluation of all children of a node in one call: either the
/// Monte-Carlo rollout estimator or the learned surrogate.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  /// parentVisited already contains parentVertex; children are the candidate
  /// next vertices, childBudgets the remaining budget after the deterministic
  /// traversal to each. rootBudget is the actual remaining budget at the
  /// vertex the search was launched from and pathEdgeMeans the mean lengths
  /// of the tree edges leading to the parent: F must cover the whole path
  /// through the child, so Monte-Carlo estimators resample that chain instead
  /// of trusting the deterministic planned budget.
  virtual std::vector<ChildEval> evaluateChildren(const Instance& inst,
                                                  const VisitedMask& parentVisited,
                                                  int parentVertex, double parentBudget,
                                                  double rootBudget,
                                                  const std::vector<double>& pathEdgeMeans,
                                                  const std::vector<int>& children,
                                                  const std::vector<double>& childBudgets,
                                                  Rng& rng) = 0;
};

/// Evaluator backed by S heuristic rollouts per child.
class RolloutEvaluator final : public Evaluator {
 public:
  explicit RolloutEvaluator(RolloutParams params) : params_(params) {}

  std::vector<ChildEval> evaluateChildren(const Instance& inst, const VisitedMask& parentVisited,
                                          int parentVertex, double parentBudget, double rootBudget,
                                          const std::vector<double>& pathEdgeMeans,
                                          const std::vector<int>& children,
                                          const std::vector<double>& childBudgets,
                                          Rng& rng) override;

 private:
  RolloutParams params_;
};

struct TreeNode {
  int vertex = -1;
  TreeNode* parent = nullptr;
  std::vector<std::unique_ptr<TreeNode>> children;  // ordered by vertex index
  double q = 0.0;
  double f = 0.0;
  int visits = 0;            // N: evaluation passes routed through this node
  double plannedBudget = 0;  // remaining budget estimate (mean lengths)
  VisitedMask visited;       // executed prefix plus the root-to-node path
  bool expanded = false;
};

struct SearchParams {
  int expansions = 350;
  double z = 0.3;               // exploration constant
  double failureBound = 0.1;    // P_f used by backup and final selection
  double selectionSigmas = 0.0;  // confidence margin on F at the final pick
  RolloutParams rolloutParams;   // only used by the rollout evaluator
};

/// UCTF tree policy value: Q(1-F) + z sqrt(log N_parent / N_child), infinity
/// for unvisited children.
double uctf(double q, double f, int nChild, int nParent, double z);

/// Descend by argmax UCTF (ties: lowest vertex index) until a node with an
/// unexpanded child or no children is reached.
TreeNode* selectLeaf(TreeNode* root, double z);

/// Create one child per vertex outside node->visited (goal included as a
/// terminal child) and evaluate all of them in a single evaluator call.
/// Children whose planned budget is negative get F forced to 1.
void expandAll(TreeNode* node, const Instance& inst, Evaluator& evaluator, Rng& rng);

/// Propagate a freshly evaluated (Q, F) pair toward the root under the
/// dual-value rules keyed on the failure bound.
void backup(TreeNode* leafChild, const Instance& inst, double failureBound);

/// One planning decision: build a fresh root at the current vertex, run the
/// configured number of expansions, and pick the root child maximizing
/// Q(1-F) among those with F <= P_f (fallback: minimum F). Returns nullopt
/// when no legal child exists.
std::optional<int> planNextVertex(const Instance& inst, const VisitedMask& executedVisited,
                                  int currentVertex, double remainingBudget,
                                  const SearchParams& params, Evaluator& evaluator, Rng& rng);

/// Root-child statistics after a full search, the supervision source for the
/// learned surrogate.
struct RootChildStat {
  int vertex = -1;
  double q = 0.0;
  double f = 0.0;
  int visits = 0;
};

/// Same as planNextVertex but also reports the root children's final (Q, F, N).
std::optional<int> planNextVertexWithStats(const Instance& inst, const VisitedMask& executedVisited,
                                           int currentVertex, double remainingBudget,
                                           const SearchParams& params, Evaluator& evaluator,
                                           Rng& rng, std::vector<RootChildStat>& stats);

}  // namespace sopcc
