#include "sopcc/executor.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <json.hpp>

namespace sopcc {

TrialRecord runTrial(const Instance& inst, const SearchParams& params, Evaluator& evaluator,
                     std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  TrialRecord rec;
  rec.seed = seed;
  rec.stream = stream;

  VisitedMask visited(inst.n, 0);
  int current = inst.startVertex;
  visited[current] = 1;
  rec.path.push_back(current);
  rec.reward = inst.rewards[current];

  while (current != inst.goalVertex) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::optional<int> next =
        planNextVertex(inst, visited, current, inst.budget - rec.realizedCost, params, evaluator,
                       rng);
    const auto t1 = std::chrono::steady_clock::now();
    const double dt = std::chrono::duration<double>(t1 - t0).count();
    rec.perStepTimes.push_back(dt);
    rec.planningTimeTotal += dt;
    if (!next) break;  // nothing legal left to do

    rec.realizedCost += sampleEdgeCost(inst, current, *next, rng);
    if (rec.realizedCost > inst.budget) return rec;  // failed mid-traversal

    current = *next;
    rec.path.push_back(current);
    if (!visited[current]) {
      visited[current] = 1;
      rec.reward += inst.rewards[current];
    }
  }
  rec.success = current == inst.goalVertex && rec.realizedCost <= inst.budget;
  return rec;
}

TrialRecord runGreedyTrial(const Instance& inst, double greedyProb, std::uint64_t seed,
                           std::uint64_t stream) {
  Rng rng(seed, stream);
  TrialRecord rec;
  rec.seed = seed;
  rec.stream = stream;

  VisitedMask visited(inst.n, 0);
  int current = inst.startVertex;
  visited[current] = 1;
  rec.path.push_back(current);
  rec.reward = inst.rewards[current];
  std::vector<int> candidates;

  while (current != inst.goalVertex) {
    const double remaining = inst.budget - rec.realizedCost;
    candidates.clear();
    for (int v = 0; v < inst.n; ++v) {
      if (visited[v] || v == inst.goalVertex) continue;
      if (inst.lengths(current, v) + inst.lengths(v, inst.goalVertex) <= remaining)
        candidates.push_back(v);
    }
    int next;
    if (candidates.empty()) {
      next = inst.goalVertex;
    } else if (rng.uniform() < greedyProb) {
      next = candidates[0];
      double best = inst.rewards[next] / inst.lengths(current, next);
      for (std::size_t k = 1; k < candidates.size(); ++k) {
        const double score = inst.rewards[candidates[k]] / inst.lengths(current, candidates[k]);
        if (score > best) {
          best = score;
          next = candidates[k];
        }
      }
    } else {
      next = candidates[rng.uniformInt(static_cast<int>(candidates.size()))];
    }
    rec.realizedCost += sampleEdgeCost(inst, current, next, rng);
    if (rec.realizedCost > inst.budget) return rec;
    current = next;
    rec.path.push_back(current);
    if (!visited[current]) {
      visited[current] = 1;
      rec.reward += inst.rewards[current];
    }
  }
  rec.success = true;
  return rec;
}

TrialRecord runFixedPathTrial(const Instance& inst, const std::vector<int>& path,
                              std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  TrialRecord rec;
  rec.seed = seed;
  rec.stream = stream;
  if (path.empty()) return rec;

  VisitedMask visited(inst.n, 0);
  rec.path.push_back(path[0]);
  visited[path[0]] = 1;
  rec.reward = inst.rewards[path[0]];
  for (std::size_t k = 1; k < path.size(); ++k) {
    rec.realizedCost += sampleEdgeCost(inst, path[k - 1], path[k], rng);
    if (rec.realizedCost > inst.budget) return rec;
    rec.path.push_back(path[k]);
    if (!visited[path[k]]) {
      visited[path[k]] = 1;
      rec.reward += inst.rewards[path[k]];
    }
  }
  rec.success = rec.path.back() == inst.goalVertex;
  return rec;
}

int resolveWorkerCount(int requested) {
  if (const char* env = std::getenv("SOPCC_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

BatchResult aggregateTrials(std::vector<TrialRecord> records) {
  BatchResult out;
  out.trials = static_cast<int>(records.size());
  double rewardSum = 0.0;
  double timeSum = 0.0;
  int successes = 0;
  for (const TrialRecord& rec : records) {  // fixed trial-index order
    if (rec.success) {
      ++successes;
      rewardSum += rec.reward;
    }
    timeSum += rec.planningTimeTotal;
  }
  out.failures = out.trials - successes;
  out.failureRate = out.trials > 0 ? static_cast<double>(out.failures) / out.trials : 0.0;
  out.meanReward = successes > 0 ? rewardSum / successes : 0.0;
  out.meanPlanTime = out.trials > 0 ? timeSum / out.trials : 0.0;
  out.records = std::move(records);
  return out;
}

namespace {

BatchResult runTrials(const std::vector<const Instance*>& perTrialInstance,
                      const SearchParams& params, const EvaluatorFactory& makeEvaluator,
                      std::uint64_t seed, int workers) {
  const int total = static_cast<int>(perTrialInstance.size());
  std::vector<TrialRecord> records(total);
  workers = std::min(resolveWorkerCount(workers), std::max(total, 1));

  std::atomic<int> nextTrial{0};
  auto work = [&] {
    const Instance* lastInstance = nullptr;
    std::unique_ptr<Evaluator> evaluator;
    for (int i = nextTrial.fetch_add(1); i < total; i = nextTrial.fetch_add(1)) {
      const Instance* inst = perTrialInstance[i];
      if (inst != lastInstance) {
        evaluator = makeEvaluator(*inst);
        lastInstance = inst;
      }
      records[i] = runTrial(*inst, params, *evaluator, seed, static_cast<std::uint64_t>(i));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return aggregateTrials(std::move(records));
}

}  // namespace

BatchResult runBatch(const Instance& inst, int trialCount, const SearchParams& params,
                     const EvaluatorFactory& makeEvaluator, std::uint64_t seed, int workers) {
  std::vector<const Instance*> perTrial(static_cast<std::size_t>(trialCount), &inst);
  return runTrials(perTrial, params, makeEvaluator, seed, workers);
}

BatchResult runBatch(const std::vector<Instance>& instances, int trialsPerInstance,
                     const SearchParams& params, const EvaluatorFactory& makeEvaluator,
                     std::uint64_t seed, int workers) {
  std::vector<const Instance*> perTrial;
  perTrial.reserve(instances.size() * trialsPerInstance);
  for (const Instance& inst : instances)
    for (int t = 0; t < trialsPerInstance; ++t) perTrial.push_back(&inst);
  return runTrials(perTrial, params, makeEvaluator, seed, workers);
}

std::string trialToJsonLine(const TrialRecord& rec) {
  nlohmann::json j;
  j["path"] = rec.path;
  j["realized_cost"] = rec.realizedCost;
  j["reward"] = rec.reward;
  j["success"] = rec.success;
  j["planning_time_s"] = rec.planningTimeTotal;
  j["per_step_times_s"] = rec.perStepTimes;
  j["seed"] = rec.seed;
  j["stream"] = rec.stream;
  return j.dump();
}

std::string batchCsvHeader() {
  return "instance,solver,n,B,P_f,mean_reward,failure_rate,mean_plan_time_s,trials,seed";
}

std::string batchCsvRow(const std::string& instanceName, const std::string& solver, int n, double B,
                        double pf, const BatchResult& result, std::uint64_t seed) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.17g,%.17g,%.17g,%.17g,%.6g,%d,%llu",
                instanceName.c_str(), solver.c_str(), n, B, pf, result.meanReward,
                result.failureRate, result.meanPlanTime, result.trials,
                static_cast<unsigned long long>(seed));
  return buf;
}

}  // namespace sopcc
