#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sopcc/instance.hpp"

namespace sopcc {

/// Ground-truth solution for a small instance.
struct OracleSolution {
  std::vector<int> path;    // v_s ... v_g; empty when infeasible
  double reward = 0.0;
  double failureProb = 1.0;
  std::string method;       // "analytic" or "monte-carlo"
  bool feasible = false;
};

/// Exact tail P(sum of independent exponentials > B) for pairwise distinct
/// rates (hypoexponential distribution). Throws UnsupportedConfigurationError
/// on duplicate rates; callers fall back to Monte Carlo.
double hypoexpTail(const std::vector<double>& means, double budget);

/// Failure probability of one concrete path: analytic when the edge means
/// along it are pairwise distinct, otherwise a Monte-Carlo estimate.
struct PathFailure {
  double prob = 0.0;
  double sigma = 0.0;  // binomial std error, 0 for the analytic route
  bool analytic = true;
};
PathFailure pathFailureProbability(const Instance& inst, const std::vector<int>& path,
                                   double budget, int mcSamples, Rng& rng);

/// Exhaustive enumeration of all simple start-goal paths (n <= 10): returns
/// the maximum-reward path whose failure probability respects the bound
/// (Monte-Carlo estimates use a one-sigma conservative margin). Ties break by
/// lower failure probability, then lexicographic path.
OracleSolution exactSolve(const Instance& inst, double budget, double failureBound, int mcSamples,
                          std::uint64_t seed = 12345);

/// Minimum achievable failure probability over all complete paths whose first
/// move is v, for every vertex v (infinity where no such path exists). Used to
/// audit planner first moves against the ground truth.
std::vector<double> firstMoveBestFailure(const Instance& inst, double budget, int mcSamples,
                                         std::uint64_t seed = 12345);

}  // namespace sopcc
