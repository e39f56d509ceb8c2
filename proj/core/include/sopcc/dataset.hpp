#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sopcc/mpnn.hpp"

namespace sopcc {

/// One supervised example: the state at a planning step plus the root-child
/// (Q, F) statistics of the full search, masked to children with enough
/// visits to be trustworthy.
struct TrainingExample {
  FeatureGraph graph;
  Eigen::VectorXd qLabels;  // per node, 0 outside the mask
  Eigen::VectorXd fLabels;  // per node, in [0, 1] where masked
  Eigen::VectorXd mask;     // {0, 1} per node
};

struct DatasetMeta {
  std::vector<int> sizes;
  double budget = 2.0;
  double failureBound = 0.1;
  int instancesPerSize = 0;
  int solvedInstances = 0;
  int examples = 0;
  std::uint64_t seed = 0;
  bool successOnly = true;
  int expansions = 350;
  int rollouts = 100;
  int minVisits = 5;
};

std::string exampleToJsonLine(const TrainingExample& ex);
TrainingExample exampleFromJsonLine(const std::string& line);

struct Dataset {
  DatasetMeta meta;
  std::vector<TrainingExample> examples;
};

void saveDataset(const Dataset& ds, const std::string& path);  // meta header + JSON-lines
Dataset loadDataset(const std::string& path);

/// Solves random instances with the rollout-backed search and distills the
/// successful trials into supervision pairs; failed trials contribute nothing.
/// Deterministic for a fixed seed, independent of the worker count.
Dataset generateDataset(const std::vector<int>& sizes, int instancesPerSize, double budget,
                        double failureBound, const SearchParams& searchParams, int minVisits,
                        std::uint64_t seed, int workers = 0);

enum class Head { Q, F };

struct TrainOptions {
  int epochs = 40;
  int batchSize = 16;
  double lr = 1e-3;
  int dim = 32;
  int edgeHidden = 16;
  int readoutHidden = 32;
  double valFraction = 0.1;
  std::uint64_t seed = 1;
  AblationMask ablation{};
  int workers = 0;  // batch-gradient fan-out
};

struct EpochLoss {
  double train = 0.0;
  double val = 0.0;
};

struct TrainResult {
  MpnnModel model;
  std::vector<EpochLoss> curve;
};

/// Minimizes masked MSE on the selected head with the adaptive-moment
/// optimizer; shuffles per epoch with a seeded RNG. Throws
/// TrainingDivergedError on a non-finite loss.
TrainResult trainModel(const Dataset& ds, Head head, const TrainOptions& opts);

/// Masked MSE of a model over a set of examples (no gradient).
double evaluateLoss(const MpnnModel& model, Head head,
                    const std::vector<const TrainingExample*>& examples);

}  // namespace sopcc
