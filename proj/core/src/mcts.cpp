#include "sopcc/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sopcc {

std::vector<ChildEval> RolloutEvaluator::evaluateChildren(
    const Instance& inst, const VisitedMask& parentVisited, int parentVertex, double parentBudget,
    double rootBudget, const std::vector<double>& pathEdgeMeans, const std::vector<int>& children,
    const std::vector<double>& childBudgets, Rng& rng) {
  (void)parentBudget;
  (void)childBudgets;
  std::vector<ChildEval> out;
  out.reserve(children.size());
  VisitedMask visited = parentVisited;
  for (std::size_t k = 0; k < children.size(); ++k) {
    const int v = children[k];
    visited[v] = 1;
    // Each run resamples every traversal from the launch vertex through the
    // child: F covers the whole path through v, not just its continuation.
    int successes = 0;
    double sum = 0.0;
    for (int s = 0; s < params_.rollouts; ++s) {
      double remaining = rootBudget;
      for (double mean : pathEdgeMeans) remaining -= rng.exponential(mean);
      remaining -= rng.exponential(inst.lengths(parentVertex, v));
      const RolloutResult run =
          rolloutOnce(inst, visited, v, inst.rewards[v], remaining, params_.greedyProb, rng);
      if (run.success) {
        ++successes;
        sum += run.reward;
      }
    }
    visited[v] = 0;
    out.push_back({successes > 0 ? sum / successes : 0.0,
                   static_cast<double>(params_.rollouts - successes) / params_.rollouts});
  }
  return out;
}

double uctf(double q, double f, int nChild, int nParent, double z) {
  if (f < 0.0 || f > 1.0) throw std::invalid_argument("uctf: F outside [0, 1]");
  if (nChild == 0) return std::numeric_limits<double>::infinity();
  return q * (1.0 - f) + z * std::sqrt(std::log(static_cast<double>(nParent)) / nChild);
}

namespace {

TreeNode* bestChildByUctf(TreeNode* node, double z) {
  TreeNode* best = nullptr;
  double bestValue = -std::numeric_limits<double>::infinity();
  for (const auto& child : node->children) {
    const double value = uctf(child->q, child->f, child->visits, node->visits, z);
    if (value > bestValue) {  // ties keep the earlier (lower-index) child
      bestValue = value;
      best = child.get();
    }
  }
  return best;
}

bool hasUnvisitedChild(const TreeNode* node) {
  for (const auto& child : node->children)
    if (child->visits == 0) return true;
  return false;
}

}  // namespace

TreeNode* selectLeaf(TreeNode* root, double z) {
  TreeNode* node = root;
  while (node->expanded && !node->children.empty() && !hasUnvisitedChild(node))
    node = bestChildByUctf(node, z);
  return node;
}

void expandAll(TreeNode* node, const Instance& inst, Evaluator& evaluator, Rng& rng) {
  if (node->expanded) throw std::logic_error("expandAll: node already expanded");
  node->expanded = true;
  if (node->vertex == inst.goalVertex) return;  // terminal

  std::vector<int> childVertices;
  std::vector<double> childBudgets;
  for (int v = 0; v < inst.n; ++v) {
    if (node->visited[v]) continue;
    childVertices.push_back(v);
    childBudgets.push_back(node->plannedBudget - inst.lengths(node->vertex, v));
  }
  if (childVertices.empty()) return;

  // Tree path from the launch vertex down to this node, as edge means.
  std::vector<double> pathEdgeMeans;
  const TreeNode* walk = node;
  while (walk->parent != nullptr) {
    pathEdgeMeans.push_back(inst.lengths(walk->parent->vertex, walk->vertex));
    walk = walk->parent;
  }
  std::reverse(pathEdgeMeans.begin(), pathEdgeMeans.end());
  const double rootBudget = walk->plannedBudget;

  const std::vector<ChildEval> evals =
      evaluator.evaluateChildren(inst, node->visited, node->vertex, node->plannedBudget, rootBudget,
                                 pathEdgeMeans, childVertices, childBudgets, rng);

  node->children.reserve(childVertices.size());
  for (std::size_t k = 0; k < childVertices.size(); ++k) {
    auto child = std::make_unique<TreeNode>();
    child->vertex = childVertices[k];
    child->parent = node;
    child->plannedBudget = childBudgets[k];
    child->visited = node->visited;
    child->visited[childVertices[k]] = 1;
    child->q = evals[k].q;
    child->f = childBudgets[k] < 0.0 ? 1.0 : evals[k].f;
    node->children.push_back(std::move(child));
  }
}

void backup(TreeNode* leafChild, const Instance& inst, double failureBound) {
  for (TreeNode* child = leafChild; child->parent != nullptr; child = child->parent) {
    TreeNode* parent = child->parent;
    parent->visits += 1;
    const double parentReward = inst.rewards[parent->vertex];
    if (parent->f <= failureBound) {
      if (child->f <= failureBound && child->q + parentReward > parent->q) {
        parent->q = child->q + parentReward;
        parent->f = child->f;
      }
    } else if (child->f < parent->f) {
      parent->f = child->f;
      parent->q = child->q + parentReward;
    }
  }
}

std::optional<int> planNextVertex(const Instance& inst, const VisitedMask& executedVisited,
                                  int currentVertex, double remainingBudget,
                                  const SearchParams& params, Evaluator& evaluator, Rng& rng) {
  std::vector<RootChildStat> stats;
  return planNextVertexWithStats(inst, executedVisited, currentVertex, remainingBudget, params,
                                 evaluator, rng, stats);
}

std::optional<int> planNextVertexWithStats(const Instance& inst, const VisitedMask& executedVisited,
                                           int currentVertex, double remainingBudget,
                                           const SearchParams& params, Evaluator& evaluator,
                                           Rng& rng, std::vector<RootChildStat>& stats) {
  TreeNode root;
  root.vertex = currentVertex;
  root.plannedBudget = remainingBudget;
  root.visited = executedVisited;
  root.visited[currentVertex] = 1;

  for (int it = 0; it < params.expansions; ++it) {
    TreeNode* leaf = selectLeaf(&root, params.z);
    if (!leaf->expanded) expandAll(leaf, inst, evaluator, rng);
    if (leaf->children.empty()) {
      // terminal (or fully exhausted) node: re-back its stored estimate
      leaf->visits += 1;
      backup(leaf, inst, params.failureBound);
      continue;
    }
    TreeNode* fresh = nullptr;
    for (const auto& child : leaf->children)
      if (child->visits == 0) {
        fresh = child.get();
        break;
      }
    fresh->visits = 1;
    backup(fresh, inst, params.failureBound);
  }

  stats.clear();
  for (const auto& child : root.children)
    stats.push_back({child->vertex, child->q, child->f, child->visits});

  if (root.children.empty()) return std::nullopt;

  const TreeNode* pick = nullptr;
  double bestScore = -std::numeric_limits<double>::infinity();
  const double sampleCount = std::max(params.rolloutParams.rollouts, 1);
  for (const auto& child : root.children) {
    // Conservative qualification: the F estimate is noisy (S-sample binomial),
    // so commit only when the estimate plus a confidence margin stays within
    // the bound. Without it the argmin over ~n noisy siblings systematically
    // picks optimistic estimates and the realized failure rate overshoots P_f.
    const double margin =
        params.selectionSigmas * std::sqrt(child->f * (1.0 - child->f) / sampleCount);
    if (child->f + margin > params.failureBound) continue;
    const double score = child->q * (1.0 - child->f);
    if (score > bestScore) {
      bestScore = score;
      pick = child.get();
    }
  }
  if (pick == nullptr) {  // nothing satisfies the chance constraint: least risky child
    double bestF = std::numeric_limits<double>::infinity();
    for (const auto& child : root.children) {
      // On ties head for the goal: when every child looks doomed, the dash to
      // the goal is the only move with a real chance of finishing in budget.
      const bool better = child->f < bestF || (child->f == bestF && child->vertex == inst.goalVertex);
      if (better) {
        bestF = child->f;
        pick = child.get();
      }
    }
  }
  return pick->vertex;
}

}  // namespace sopcc
