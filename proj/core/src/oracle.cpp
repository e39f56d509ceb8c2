#include "sopcc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "sopcc/errors.hpp"

namespace sopcc {

double hypoexpTail(const std::vector<double>& means, double budget) {
  if (means.empty()) return 0.0;
  if (budget <= 0.0) return 1.0;  // strictly positive support
  std::vector<double> rates;
  rates.reserve(means.size());
  for (double m : means) {
    if (!(m > 0.0)) throw UnsupportedConfigurationError("hypoexpTail: non-positive mean");
    rates.push_back(1.0 / m);
  }
  for (std::size_t i = 0; i < rates.size(); ++i)
    for (std::size_t j = i + 1; j < rates.size(); ++j)
      if (std::abs(rates[i] - rates[j]) <= 1e-12 * std::max(rates[i], rates[j]))
        throw UnsupportedConfigurationError("hypoexpTail: duplicate rates");

  double tail = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    double coeff = 1.0;
    for (std::size_t j = 0; j < rates.size(); ++j)
      if (j != i) coeff *= rates[j] / (rates[j] - rates[i]);
    tail += coeff * std::exp(-rates[i] * budget);
  }
  return std::clamp(tail, 0.0, 1.0);
}

PathFailure pathFailureProbability(const Instance& inst, const std::vector<int>& path,
                                   double budget, int mcSamples, Rng& rng) {
  PathFailure out;
  if (path.size() < 2) {
    out.prob = 0.0;
    return out;
  }
  std::vector<double> means;
  for (std::size_t k = 0; k + 1 < path.size(); ++k)
    means.push_back(inst.lengths(path[k], path[k + 1]));
  try {
    out.prob = hypoexpTail(means, budget);
    out.analytic = true;
    return out;
  } catch (const UnsupportedConfigurationError&) {
    // duplicate rates: Monte Carlo
  }
  int failures = 0;
  for (int s = 0; s < mcSamples; ++s) {
    double total = 0.0;
    for (double m : means) total += rng.exponential(m);
    if (total > budget) ++failures;
  }
  out.prob = static_cast<double>(failures) / mcSamples;
  out.sigma = std::sqrt(out.prob * (1.0 - out.prob) / mcSamples);
  out.analytic = false;
  return out;
}

namespace {

double pathReward(const Instance& inst, const std::vector<int>& path) {
  double reward = 0.0;
  std::vector<char> seen(inst.n, 0);
  for (int v : path)
    if (!seen[v]) {
      seen[v] = 1;
      reward += inst.rewards[v];
    }
  return reward;
}

/// Visits every simple v_s -> v_g path (ends may coincide when v_s = v_g).
void enumeratePaths(const Instance& inst, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> path{inst.startVertex};
  std::vector<char> visited(inst.n, 0);
  visited[inst.startVertex] = 1;

  std::function<void()> dfs = [&] {
    const int current = path.back();
    if (current == inst.goalVertex && path.size() == 1) {
      fn(path);  // trivial v_s = v_g path
    }
    if (current != inst.goalVertex) {
      path.push_back(inst.goalVertex);
      fn(path);
      path.pop_back();
    }
    for (int v = 0; v < inst.n; ++v) {
      if (visited[v] || v == inst.goalVertex) continue;
      visited[v] = 1;
      path.push_back(v);
      dfs();
      path.pop_back();
      visited[v] = 0;
    }
  };
  dfs();
}

}  // namespace

OracleSolution exactSolve(const Instance& inst, double budget, double failureBound, int mcSamples,
                          std::uint64_t seed) {
  if (inst.n > 10)
    throw InvalidInstanceError("exactSolve: instance too large for exhaustive enumeration");
  Rng rng(seed, 0);
  OracleSolution best;

  enumeratePaths(inst, [&](const std::vector<int>& path) {
    const PathFailure pf = pathFailureProbability(inst, path, budget, mcSamples, rng);
    // one-sigma conservative margin on Monte-Carlo estimates
    if (pf.prob + pf.sigma > failureBound) return;
    const double reward = pathReward(inst, path);
    const bool better =
        !best.feasible || reward > best.reward ||
        (reward == best.reward &&
         (pf.prob < best.failureProb || (pf.prob == best.failureProb && path < best.path)));
    if (better) {
      best.feasible = true;
      best.path = path;
      best.reward = reward;
      best.failureProb = pf.prob;
      best.method = pf.analytic ? "analytic" : "monte-carlo";
    }
  });
  return best;
}

std::vector<double> firstMoveBestFailure(const Instance& inst, double budget, int mcSamples,
                                         std::uint64_t seed) {
  if (inst.n > 10)
    throw InvalidInstanceError("firstMoveBestFailure: instance too large");
  Rng rng(seed, 1);
  std::vector<double> best(inst.n, std::numeric_limits<double>::infinity());
  enumeratePaths(inst, [&](const std::vector<int>& path) {
    if (path.size() < 2) return;
    const PathFailure pf = pathFailureProbability(inst, path, budget, mcSamples, rng);
    best[path[1]] = std::min(best[path[1]], pf.prob);
  });
  return best;
}

}  // namespace sopcc
