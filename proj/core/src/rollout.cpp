#include "sopcc/rollout.hpp"

namespace sopcc {

RolloutResult rolloutOnce(const Instance& inst, const VisitedMask& visited, int currentVertex,
                          double baseReward, double remainingBudget, double greedyProb, Rng& rng) {
  double reward = baseReward;
  double remaining = remainingBudget;
  if (remaining < 0.0) return {reward, false};
  if (currentVertex == inst.goalVertex) return {reward, true};

  VisitedMask seen = visited;
  seen[currentVertex] = 1;
  int u = currentVertex;
  std::vector<int> candidates;
  candidates.reserve(inst.n);
  while (true) {
    candidates.clear();
    for (int v = 0; v < inst.n; ++v) {
      if (seen[v] || v == inst.goalVertex) continue;
      if (inst.lengths(u, v) + inst.lengths(v, inst.goalVertex) <= remaining)
        candidates.push_back(v);
    }
    int next;
    if (candidates.empty()) {
      next = inst.goalVertex;
    } else if (rng.uniform() < greedyProb) {
      next = candidates[0];
      double best = inst.rewards[next] / inst.lengths(u, next);
      for (std::size_t k = 1; k < candidates.size(); ++k) {
        const double score = inst.rewards[candidates[k]] / inst.lengths(u, candidates[k]);
        if (score > best) {
          best = score;
          next = candidates[k];
        }
      }
    } else {
      next = candidates[rng.uniformInt(static_cast<int>(candidates.size()))];
    }
    remaining -= rng.exponential(inst.lengths(u, next));
    if (remaining < 0.0) return {reward, false};
    if (!seen[next]) {
      seen[next] = 1;
      reward += inst.rewards[next];
    }
    if (next == inst.goalVertex) return {reward, true};
    u = next;
  }
}

RolloutResult rolloutOnce(const Instance& inst, const PathState& state, double remainingBudget,
                          double greedyProb, Rng& rng) {
  VisitedMask visited(inst.n, 0);
  for (int v : state.visited) visited[v] = 1;
  return rolloutOnce(inst, visited, state.currentVertex(), state.collectedReward, remainingBudget,
                     greedyProb, rng);
}

RolloutEstimate estimateQF(const Instance& inst, const VisitedMask& visited, int currentVertex,
                           double baseReward, double remainingBudget, const RolloutParams& params,
                           Rng& rng) {
  RolloutEstimate est;
  double sum = 0.0;
  for (int s = 0; s < params.rollouts; ++s) {
    const RolloutResult run = rolloutOnce(inst, visited, currentVertex, baseReward, remainingBudget,
                                          params.greedyProb, rng);
    if (run.success) {
      ++est.successes;
      sum += run.reward;
    }
  }
  est.f = static_cast<double>(params.rollouts - est.successes) / params.rollouts;
  est.q = est.successes > 0 ? sum / est.successes : 0.0;
  return est;
}

RolloutEstimate estimateQF(const Instance& inst, const PathState& state, double remainingBudget,
                           const RolloutParams& params, Rng& rng) {
  VisitedMask visited(inst.n, 0);
  for (int v : state.visited) visited[v] = 1;
  return estimateQF(inst, visited, state.currentVertex(), state.collectedReward, remainingBudget,
                    params, rng);
}

}  // namespace sopcc
