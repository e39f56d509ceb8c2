#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sopcc/rng.hpp"

namespace sopcc {

/// A stochastic orienteering instance on a complete weighted graph.
///
/// Deterministic edge lengths are stored, not recomputed from coordinates, so
/// non-Euclidean instances load from file unchanged. Traversal costs are drawn
/// from the cost model (currently exponential with mean equal to the length).
struct Instance {
  int n = 0;
  std::vector<std::pair<double, double>> coords;
  std::vector<double> rewards;
  int startVertex = 0;
  int goalVertex = 0;
  double budget = 0.0;
  double failureBound = 0.0;  // P_f
  Eigen::MatrixXd lengths;    // n x n, symmetric, zero diagonal
  std::string costModel = "exponential";

  /// Throws InvalidInstanceError if any structural invariant is violated.
  void validate() const;
};

/// Ordered prefix of an executed path with its realized cost and reward.
struct PathState {
  std::vector<int> visited;
  double realizedCost = 0.0;
  double collectedReward = 0.0;

  int currentVertex() const { return visited.back(); }
};

/// Random instance in the unit square: coords and rewards uniform in [0, 1],
/// lengths Euclidean, start/goal drawn uniformly (distinct when n > 1).
Instance generateInstance(int n, double budget, double failureBound, Rng& rng);

/// One draw of the stochastic traversal cost of edge (i, j).
double sampleEdgeCost(const Instance& inst, int i, int j, Rng& rng);

/// Sum of independent per-edge cost draws along a simple path.
double pathCostSample(const Instance& inst, const std::vector<int>& path, Rng& rng);

/// JSON (de)serialization; loadInstance validates all invariants.
std::string instanceToJson(const Instance& inst);
Instance instanceFromJson(const std::string& json);
void saveInstance(const Instance& inst, const std::string& path);
Instance loadInstance(const std::string& path);

}  // namespace sopcc
