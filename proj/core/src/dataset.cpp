#include "sopcc/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "sopcc/errors.hpp"
#include "sopcc/executor.hpp"

namespace sopcc {

std::string exampleToJsonLine(const TrainingExample& ex) {
  nlohmann::json j;
  const int n = ex.graph.size();
  auto attrs = nlohmann::json::array();
  for (int v = 0; v < n; ++v) {
    auto row = nlohmann::json::array();
    for (int a = 0; a < kNodeAttrCount; ++a) row.push_back(ex.graph.nodeAttrs(v, a));
    attrs.push_back(std::move(row));
  }
  j["attrs"] = std::move(attrs);
  auto edges = nlohmann::json::array();
  for (int v = 0; v < n; ++v) {
    auto row = nlohmann::json::array();
    for (int w = 0; w < n; ++w) row.push_back(ex.graph.edgeAttrs(v, w));
    edges.push_back(std::move(row));
  }
  j["edges"] = std::move(edges);
  j["q"] = std::vector<double>(ex.qLabels.data(), ex.qLabels.data() + n);
  j["f"] = std::vector<double>(ex.fLabels.data(), ex.fLabels.data() + n);
  j["mask"] = std::vector<double>(ex.mask.data(), ex.mask.data() + n);
  return j.dump();
}

TrainingExample exampleFromJsonLine(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  TrainingExample ex;
  const auto& attrs = j.at("attrs");
  const int n = static_cast<int>(attrs.size());
  ex.graph.nodeAttrs.resize(n, kNodeAttrCount);
  for (int v = 0; v < n; ++v)
    for (int a = 0; a < kNodeAttrCount; ++a) ex.graph.nodeAttrs(v, a) = attrs.at(v).at(a);
  const auto& edges = j.at("edges");
  ex.graph.edgeAttrs.resize(n, n);
  for (int v = 0; v < n; ++v)
    for (int w = 0; w < n; ++w) ex.graph.edgeAttrs(v, w) = edges.at(v).at(w);
  auto vec = [n](const nlohmann::json& arr) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = arr.at(i);
    return v;
  };
  ex.qLabels = vec(j.at("q"));
  ex.fLabels = vec(j.at("f"));
  ex.mask = vec(j.at("mask"));
  return ex;
}

namespace {

nlohmann::json metaToJson(const DatasetMeta& m) {
  nlohmann::json j;
  j["sizes"] = m.sizes;
  j["budget"] = m.budget;
  j["p_f"] = m.failureBound;
  j["instances_per_size"] = m.instancesPerSize;
  j["solved_instances"] = m.solvedInstances;
  j["examples"] = m.examples;
  j["seed"] = m.seed;
  j["success_only"] = m.successOnly;
  j["expansions"] = m.expansions;
  j["rollouts"] = m.rollouts;
  j["min_visits"] = m.minVisits;
  return j;
}

DatasetMeta metaFromJson(const nlohmann::json& j) {
  DatasetMeta m;
  m.sizes = j.at("sizes").get<std::vector<int>>();
  m.budget = j.at("budget");
  m.failureBound = j.at("p_f");
  m.instancesPerSize = j.at("instances_per_size");
  m.solvedInstances = j.at("solved_instances");
  m.examples = j.at("examples");
  m.seed = j.at("seed");
  m.successOnly = j.at("success_only");
  m.expansions = j.at("expansions");
  m.rollouts = j.at("rollouts");
  m.minVisits = j.at("min_visits");
  return m;
}

}  // namespace

void saveDataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  nlohmann::json header;
  header["meta"] = metaToJson(ds.meta);
  out << header.dump() << '\n';
  for (const TrainingExample& ex : ds.examples) out << exampleToJsonLine(ex) << '\n';
}

Dataset loadDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  ds.meta = metaFromJson(nlohmann::json::parse(line).at("meta"));
  while (std::getline(in, line))
    if (!line.empty()) ds.examples.push_back(exampleFromJsonLine(line));
  return ds;
}

namespace {

struct InstanceResult {
  bool success = false;
  std::vector<TrainingExample> examples;
};

/// Plan-execute one instance, recording an example at every planning step.
InstanceResult solveAndDistill(const Instance& inst, const SearchParams& params, int minVisits,
                               std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  RolloutEvaluator evaluator(params.rolloutParams);
  InstanceResult out;

  VisitedMask visited(inst.n, 0);
  int current = inst.startVertex;
  visited[current] = 1;
  double cost = 0.0;

  while (current != inst.goalVertex) {
    std::vector<RootChildStat> stats;
    const std::optional<int> next = planNextVertexWithStats(
        inst, visited, current, inst.budget - cost, params, evaluator, rng, stats);
    if (!next) break;

    TrainingExample ex;
    ex.graph = encodeState(inst, visited, current, inst.budget - cost);
    ex.qLabels = Eigen::VectorXd::Zero(inst.n);
    ex.fLabels = Eigen::VectorXd::Zero(inst.n);
    ex.mask = Eigen::VectorXd::Zero(inst.n);
    for (const RootChildStat& s : stats) {
      if (s.visits < minVisits) continue;
      ex.qLabels(s.vertex) = s.q;
      ex.fLabels(s.vertex) = s.f;
      ex.mask(s.vertex) = 1.0;
    }
    if (ex.mask.sum() > 0.0) out.examples.push_back(std::move(ex));

    cost += sampleEdgeCost(inst, current, *next, rng);
    if (cost > inst.budget) return out;  // failed trial
    current = *next;
    visited[current] = 1;
  }
  out.success = current == inst.goalVertex && cost <= inst.budget;
  return out;
}

}  // namespace

Dataset generateDataset(const std::vector<int>& sizes, int instancesPerSize, double budget,
                        double failureBound, const SearchParams& searchParams, int minVisits,
                        std::uint64_t seed, int workers) {
  const int total = static_cast<int>(sizes.size()) * instancesPerSize;
  std::vector<InstanceResult> results(total);

  std::atomic<int> nextIdx{0};
  auto work = [&] {
    for (int k = nextIdx.fetch_add(1); k < total; k = nextIdx.fetch_add(1)) {
      const int n = sizes[k / instancesPerSize];
      Rng genRng(seed, static_cast<std::uint64_t>(2 * k));
      const Instance inst = generateInstance(n, budget, failureBound, genRng);
      results[k] = solveAndDistill(inst, searchParams, minVisits, seed,
                                   static_cast<std::uint64_t>(2 * k + 1));
    }
  };
  const int w = std::min(resolveWorkerCount(workers), std::max(total, 1));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  Dataset ds;
  ds.meta.sizes = sizes;
  ds.meta.budget = budget;
  ds.meta.failureBound = failureBound;
  ds.meta.instancesPerSize = instancesPerSize;
  ds.meta.seed = seed;
  ds.meta.successOnly = true;
  ds.meta.expansions = searchParams.expansions;
  ds.meta.rollouts = searchParams.rolloutParams.rollouts;
  ds.meta.minVisits = minVisits;
  for (InstanceResult& r : results) {  // instance-index order
    if (!r.success) continue;          // only successful solutions supervise
    ds.meta.solvedInstances += 1;
    for (TrainingExample& ex : r.examples) ds.examples.push_back(std::move(ex));
  }
  ds.meta.examples = static_cast<int>(ds.examples.size());
  return ds;
}

namespace {

FeatureGraph applyAblation(const FeatureGraph& g, const AblationMask& mask) {
  FeatureGraph out = g;
  for (int a = 0; a < kNodeAttrCount; ++a)
    if (mask[a]) out.nodeAttrs.col(a).setZero();
  return out;
}

struct ExampleGrad {
  double loss = 0.0;
  std::vector<nn::Mat> grads;
};

ExampleGrad exampleGradient(const MpnnModel& model, const TrainingExample& ex, Head head) {
  ExampleGrad out;
  const double count = ex.mask.sum();
  const Eigen::VectorXd& target = head == Head::Q ? ex.qLabels : ex.fLabels;
  const FeatureGraph g = applyAblation(ex.graph, model.ablation);

  ad::Tape tape;
  const TapedMpnn vars = record(tape, model);
  const std::vector<ad::Tape::Var> outputs = mpnnForwardTaped(tape, vars, model, g);

  std::vector<ad::Tape::Var> terms;
  for (int v = 0; v < ex.mask.size(); ++v) {
    if (ex.mask(v) == 0.0) continue;
    nn::Mat y(1, 1);
    y(0, 0) = target(v);
    terms.push_back(tape.square(tape.sub(outputs[v], tape.constant(y))));
  }
  if (terms.empty()) {
    out.grads.assign(const_cast<MpnnModel&>(model).namedParams().size(), nn::Mat());
    return out;
  }
  const ad::Tape::Var loss = tape.scale(tape.sum(terms), 1.0 / count);
  out.loss = tape.scalar(loss);
  if (!std::isfinite(out.loss)) throw TrainingDivergedError("non-finite training loss");
  tape.backward(loss);

  for (ad::Tape::Var leafVar : vars.leaves(model)) out.grads.push_back(tape.grad(leafVar));
  return out;
}

}  // namespace

double evaluateLoss(const MpnnModel& model, Head head,
                    const std::vector<const TrainingExample*>& examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const TrainingExample* ex : examples) {
    const FeatureGraph g = applyAblation(ex->graph, model.ablation);
    const Eigen::VectorXd pred = mpnnForward(model, g);
    total += nn::mseLoss(pred, head == Head::Q ? ex->qLabels : ex->fLabels, ex->mask);
  }
  return total / static_cast<double>(examples.size());
}

TrainResult trainModel(const Dataset& ds, Head head, const TrainOptions& opts) {
  if (ds.examples.empty()) throw std::invalid_argument("trainModel: empty dataset");

  Rng initRng(opts.seed, 17);
  TrainResult result;
  result.model = makeMpnn(opts.dim, opts.edgeHidden, opts.readoutHidden,
                          head == Head::Q ? nn::Activation::Identity : nn::Activation::Sigmoid,
                          initRng);
  result.model.ablation = opts.ablation;
  MpnnModel& model = result.model;

  // 90/10 split on a seeded shuffle
  std::vector<int> order(ds.examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng splitRng(opts.seed, 23);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
    std::swap(order[i], order[splitRng.uniformInt(i + 1)]);
  const int valCount =
      std::min(static_cast<int>(order.size()) - 1,
               static_cast<int>(std::llround(opts.valFraction * order.size())));
  std::vector<int> trainIdx(order.begin(), order.end() - valCount);
  std::vector<const TrainingExample*> valSet;
  for (auto it = order.end() - valCount; it != order.end(); ++it)
    valSet.push_back(&ds.examples[*it]);

  const auto named = model.namedParams();
  std::vector<nn::Mat*> params;
  for (const auto& [name, mat] : named) params.push_back(mat);

  nn::AdamState adam;
  adam.lr = opts.lr;
  const int workers = std::min(resolveWorkerCount(opts.workers), opts.batchSize);

  for (int epoch = 0;; ++epoch) {
    Rng shuffleRng(opts.seed, 1000 + static_cast<std::uint64_t>(epoch));
    for (int i = static_cast<int>(trainIdx.size()) - 1; i > 0; --i)
      std::swap(trainIdx[i], trainIdx[shuffleRng.uniformInt(i + 1)]);

    double epochLoss = 0.0;
    int seen = 0;
    for (std::size_t start = 0; start < trainIdx.size(); start += opts.batchSize) {
      const int count =
          static_cast<int>(std::min<std::size_t>(opts.batchSize, trainIdx.size() - start));
      std::vector<ExampleGrad> grads(count);
      std::atomic<int> next{0};
      auto work = [&] {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          grads[i] = exampleGradient(model, ds.examples[trainIdx[start + i]], head);
      };
      if (workers <= 1 || count == 1) {
        work();
      } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < std::min(workers, count); ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
      }

      std::vector<nn::Mat> batchGrad;
      for (const nn::Mat* p : params) batchGrad.emplace_back(nn::Mat::Zero(p->rows(), p->cols()));
      int contributing = 0;
      for (const ExampleGrad& eg : grads) {  // fixed example order
        if (eg.grads.empty() || eg.grads[0].size() == 0) continue;
        ++contributing;
        epochLoss += eg.loss;
        ++seen;
        for (std::size_t p = 0; p < batchGrad.size(); ++p) batchGrad[p] += eg.grads[p];
      }
      if (contributing == 0) continue;
      for (nn::Mat& g : batchGrad) g /= contributing;
      nn::adamStep(adam, params, batchGrad);
    }

    EpochLoss el;
    el.train = seen > 0 ? epochLoss / seen : 0.0;
    el.val = evaluateLoss(model, head, valSet);
    if (!std::isfinite(el.train) || !std::isfinite(el.val))
      throw TrainingDivergedError("non-finite epoch loss");
    result.curve.push_back(el);
    if (epoch + 1 >= opts.epochs) break;
  }
  return result;
}

}  // namespace sopcc
