#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sopcc/instance.hpp"
#include "sopcc/mcts.hpp"

namespace sopcc {

/// One plan-execute episode.
struct TrialRecord {
  std::vector<int> path;
  double realizedCost = 0.0;
  double reward = 0.0;  // sum of r over distinct path vertices
  bool success = false;
  double planningTimeTotal = 0.0;  // seconds, planning only
  std::vector<double> perStepTimes;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Aggregate over a batch of trials. meanReward is conditioned on success
/// (failed runs are excluded, matching the success-conditioned Q statistics);
/// it is 0 when every trial fails.
struct BatchResult {
  int trials = 0;
  int failures = 0;
  double meanReward = 0.0;
  double failureRate = 0.0;
  double meanPlanTime = 0.0;
  std::vector<TrialRecord> records;
};

/// Factory so each trial can own a private evaluator where needed; must be
/// safe to call from concurrent workers.
using EvaluatorFactory = std::function<std::unique_ptr<Evaluator>(const Instance&)>;

/// The online loop: plan one vertex, traverse with a sampled cost, decrement
/// the budget, replan; stops at the goal or the moment the budget is
/// exceeded. Costs and planning use rng streams derived from (seed, stream).
TrialRecord runTrial(const Instance& inst, const SearchParams& params, Evaluator& evaluator,
                     std::uint64_t seed, std::uint64_t stream);

/// trialCount trials on one instance, parallel over `workers` threads
/// (0 = hardware concurrency, overridable by SOPCC_WORKERS). Aggregation is
/// in trial-index order, so results are worker-count independent.
BatchResult runBatch(const Instance& inst, int trialCount, const SearchParams& params,
                     const EvaluatorFactory& makeEvaluator, std::uint64_t seed, int workers = 0);

/// One trial per instance, parallelized the same way.
BatchResult runBatch(const std::vector<Instance>& instances, int trialsPerInstance,
                     const SearchParams& params, const EvaluatorFactory& makeEvaluator,
                     std::uint64_t seed, int workers = 0);

/// Tree-free floor baseline: walks the heuristic policy directly (no search,
/// no replanning statistics beyond a zero planning time).
TrialRecord runGreedyTrial(const Instance& inst, double greedyProb, std::uint64_t seed,
                           std::uint64_t stream);

/// Executes a fixed precomputed path with sampled costs (used for the oracle
/// solver tag).
TrialRecord runFixedPathTrial(const Instance& inst, const std::vector<int>& path,
                              std::uint64_t seed, std::uint64_t stream);

/// Aggregates an arbitrary record list in index order.
BatchResult aggregateTrials(std::vector<TrialRecord> records);

/// Worker count from SOPCC_WORKERS, else `requested`, else hardware concurrency.
int resolveWorkerCount(int requested);

/// TrialRecords as JSON-lines.
std::string trialToJsonLine(const TrialRecord& rec);

/// CSV row (no header): instance, solver, n, B, P_f, mean_reward,
/// failure_rate, mean_plan_time_s, trials, seed.
std::string batchCsvHeader();
std::string batchCsvRow(const std::string& instanceName, const std::string& solver, int n, double B,
                        double pf, const BatchResult& result, std::uint64_t seed);

}  // namespace sopcc
