#include <benchmark/benchmark.h>

#include <memory>

#include "sopcc/mpnn.hpp"

using namespace sopcc;

namespace {

Instance instanceOfSize(int n) {
  Rng rng(42, 0);
  return generateInstance(n, 2.0, 0.1, rng);
}

MpnnModel modelFor(nn::Activation head, int dim = 16) {
  Rng rng(7, head == nn::Activation::Identity ? 0 : 1);
  return makeMpnn(dim, 8, 16, head, rng);
}

void BM_Uctf(benchmark::State& state) {
  double q = 1.7, f = 0.06;
  int n = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(uctf(q, f, n % 100 + 1, 350, 0.3));
    ++n;
  }
}
BENCHMARK(BM_Uctf);

void BM_RolloutOnce(benchmark::State& state) {
  const Instance inst = instanceOfSize(static_cast<int>(state.range(0)));
  VisitedMask visited(inst.n, 0);
  visited[inst.startVertex] = 1;
  Rng rng(1, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rolloutOnce(inst, visited, inst.startVertex, 0.0, inst.budget, 0.7, rng));
}
BENCHMARK(BM_RolloutOnce)->Arg(20)->Arg(50);

void BM_RolloutEvaluator(benchmark::State& state) {
  const Instance inst = instanceOfSize(20);
  RolloutParams params;
  params.rollouts = static_cast<int>(state.range(0));
  RolloutEvaluator eval(params);
  VisitedMask visited(inst.n, 0);
  visited[inst.startVertex] = 1;
  std::vector<int> children;
  std::vector<double> budgets;
  for (int v = 0; v < inst.n; ++v)
    if (!visited[v]) {
      children.push_back(v);
      budgets.push_back(inst.budget - inst.lengths(inst.startVertex, v));
    }
  Rng rng(1, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(eval.evaluateChildren(inst, visited, inst.startVertex, inst.budget,
                                                   inst.budget, {}, children, budgets, rng));
}
BENCHMARK(BM_RolloutEvaluator)->Arg(100);

void BM_SurrogateEvaluator(benchmark::State& state) {
  const Instance inst = instanceOfSize(20);
  const MpnnModel q = modelFor(nn::Activation::Identity);
  const MpnnModel f = modelFor(nn::Activation::Sigmoid);
  SurrogateEvaluator eval(q, f, inst);
  VisitedMask visited(inst.n, 0);
  visited[inst.startVertex] = 1;
  std::vector<int> children;
  std::vector<double> budgets;
  for (int v = 0; v < inst.n; ++v)
    if (!visited[v]) {
      children.push_back(v);
      budgets.push_back(inst.budget - inst.lengths(inst.startVertex, v));
    }
  Rng rng(1, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(eval.evaluateChildren(inst, visited, inst.startVertex, inst.budget,
                                                   inst.budget, {}, children, budgets, rng));
}
BENCHMARK(BM_SurrogateEvaluator);

void BM_MpnnForward(benchmark::State& state) {
  const Instance inst = instanceOfSize(static_cast<int>(state.range(0)));
  const MpnnModel model = modelFor(nn::Activation::Sigmoid, static_cast<int>(state.range(1)));
  const EdgeCache cache = buildEdgeCache(model, inst.lengths);
  VisitedMask visited(inst.n, 0);
  visited[inst.startVertex] = 1;
  const FeatureGraph g = encodeState(inst, visited, inst.startVertex, inst.budget);
  for (auto _ : state) benchmark::DoNotOptimize(mpnnForward(model, g, cache));
}
BENCHMARK(BM_MpnnForward)->Args({20, 8})->Args({20, 16})->Args({50, 16});

void BM_MpnnForwardUncached(benchmark::State& state) {
  const Instance inst = instanceOfSize(20);
  const MpnnModel model = modelFor(nn::Activation::Sigmoid);
  VisitedMask visited(inst.n, 0);
  visited[inst.startVertex] = 1;
  const FeatureGraph g = encodeState(inst, visited, inst.startVertex, inst.budget);
  for (auto _ : state) benchmark::DoNotOptimize(mpnnForward(model, g));
}
BENCHMARK(BM_MpnnForwardUncached);

void BM_EdgeCacheBuild(benchmark::State& state) {
  const Instance inst = instanceOfSize(static_cast<int>(state.range(0)));
  const MpnnModel model = modelFor(nn::Activation::Identity);
  for (auto _ : state) benchmark::DoNotOptimize(buildEdgeCache(model, inst.lengths));
}
BENCHMARK(BM_EdgeCacheBuild)->Arg(20)->Arg(50);

void BM_PlanNextVertex(benchmark::State& state) {
  const Instance inst = instanceOfSize(20);
  SearchParams params;
  params.expansions = 350;
  params.rolloutParams.rollouts = 100;
  VisitedMask visited(inst.n, 0);
  visited[inst.startVertex] = 1;
  const bool surrogate = state.range(0) != 0;
  const MpnnModel q = modelFor(nn::Activation::Identity);
  const MpnnModel f = modelFor(nn::Activation::Sigmoid);
  std::unique_ptr<Evaluator> eval;
  if (surrogate)
    eval = std::make_unique<SurrogateEvaluator>(q, f, inst);
  else
    eval = std::make_unique<RolloutEvaluator>(params.rolloutParams);
  Rng rng(1, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        planNextVertex(inst, visited, inst.startVertex, inst.budget, params, *eval, rng));
}
BENCHMARK(BM_PlanNextVertex)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
