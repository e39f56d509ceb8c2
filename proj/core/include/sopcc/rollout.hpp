#pragma once

#include <vector>

#include "sopcc/instance.hpp"
#include "sopcc/rng.hpp"

namespace sopcc {

/// Mask of visited vertices, indexed by vertex id.
using VisitedMask = std::vector<char>;

struct RolloutParams {
  int rollouts = 100;       // S
  double greedyProb = 0.7;  // probability of the greedy move vs uniform
};

/// Monte-Carlo (Q, F) estimate from S simulated continuations.
struct RolloutEstimate {
  double q = 0.0;  // mean reward of successful runs, 0 when none succeed
  double f = 0.0;  // failed / S
  int successes = 0;
};

struct RolloutResult {
  double reward = 0.0;
  bool success = false;
};

/// One simulated continuation under the handcrafted heuristic.
///
/// From the current vertex, candidates are the unvisited non-goal vertices
/// whose deterministic detour through the goal fits the remaining budget in
/// expectation; with probability greedyProb the candidate maximizing
/// reward/length is taken, otherwise a uniform one. An empty candidate set
/// heads straight to the goal. Every traversal draws a sampled cost.
/// Returned reward is baseReward plus the rewards of newly visited vertices.
RolloutResult rolloutOnce(const Instance& inst, const VisitedMask& visited, int currentVertex,
                          double baseReward, double remainingBudget, double greedyProb, Rng& rng);

/// PathState convenience overload: baseReward = state.collectedReward.
RolloutResult rolloutOnce(const Instance& inst, const PathState& state, double remainingBudget,
                          double greedyProb, Rng& rng);

/// S-run Monte-Carlo estimator behind the tree search: F is the failed-run
/// fraction, Q the mean reward over successful runs only.
RolloutEstimate estimateQF(const Instance& inst, const VisitedMask& visited, int currentVertex,
                           double baseReward, double remainingBudget, const RolloutParams& params,
                           Rng& rng);

RolloutEstimate estimateQF(const Instance& inst, const PathState& state, double remainingBudget,
                           const RolloutParams& params, Rng& rng);

}  // namespace sopcc
