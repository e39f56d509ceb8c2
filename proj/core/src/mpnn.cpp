#include "sopcc/mpnn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sopcc {

namespace {

const std::array<std::string, 8> kAttrNames = {"visited", "x",      "y",    "reward",
                                               "budget",  "start",  "goal", "current"};

int pairIndex(int v, int w, int n) {
  return v < w ? v * n + w : w * n + v;
}

}  // namespace

AblationMask ablationMaskFromNames(const std::string& commaSeparated) {
  AblationMask mask{};
  std::stringstream ss(commaSeparated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    bool found = false;
    for (int i = 0; i < kNodeAttrCount; ++i)
      if (kAttrNames[i] == item) {
        mask[i] = true;
        found = true;
        break;
      }
    if (!found) throw std::invalid_argument("unknown attribute in ablation mask: " + item);
  }
  return mask;
}

std::string ablationMaskNames(const AblationMask& mask) {
  std::string out;
  for (int i = 0; i < kNodeAttrCount; ++i)
    if (mask[i]) {
      if (!out.empty()) out += ',';
      out += kAttrNames[i];
    }
  return out;
}

FeatureGraph encodeState(const Instance& inst, const VisitedMask& visited, int currentVertex,
                         double remainingBudget, const AblationMask& mask) {
  if (currentVertex < 0 || currentVertex >= inst.n)
    throw std::invalid_argument("encodeState: invalid current vertex");
  FeatureGraph g;
  g.nodeAttrs.setZero(inst.n, kNodeAttrCount);
  for (int v = 0; v < inst.n; ++v) {
    g.nodeAttrs(v, kAttrVisited) = visited[v] ? 1.0 : 0.0;
    g.nodeAttrs(v, kAttrX) = inst.coords[v].first;
    g.nodeAttrs(v, kAttrY) = inst.coords[v].second;
    g.nodeAttrs(v, kAttrReward) = inst.rewards[v];
    g.nodeAttrs(v, kAttrBudget) = remainingBudget;
    g.nodeAttrs(v, kAttrIsStart) = v == inst.startVertex ? 1.0 : 0.0;
    g.nodeAttrs(v, kAttrIsGoal) = v == inst.goalVertex ? 1.0 : 0.0;
    g.nodeAttrs(v, kAttrIsCurrent) = v == currentVertex ? 1.0 : 0.0;
  }
  g.nodeAttrs(currentVertex, kAttrVisited) = 1.0;
  for (int a = 0; a < kNodeAttrCount; ++a)
    if (mask[a]) g.nodeAttrs.col(a).setZero();
  g.edgeAttrs = inst.lengths;
  return g;
}

std::vector<std::pair<std::string, nn::Mat*>> MpnnModel::namedParams() {
  std::vector<std::pair<std::string, nn::Mat*>> out;
  out.emplace_back("input.W", &inputW);
  out.emplace_back("input.b", &inputB);
  for (int t = 0; t < layers; ++t) {
    for (std::size_t l = 0; l < edgeNets[t].layers.size(); ++l) {
      out.emplace_back("edge" + std::to_string(t) + ".W" + std::to_string(l),
                       &edgeNets[t].layers[l].W);
      out.emplace_back("edge" + std::to_string(t) + ".b" + std::to_string(l),
                       &edgeNets[t].layers[l].b);
    }
    const std::string p = "gru" + std::to_string(t) + ".";
    nn::GruParams& g = grus[t];
    out.emplace_back(p + "Wz", &g.Wz);
    out.emplace_back(p + "Uz", &g.Uz);
    out.emplace_back(p + "Wr", &g.Wr);
    out.emplace_back(p + "Ur", &g.Ur);
    out.emplace_back(p + "Wh", &g.Wh);
    out.emplace_back(p + "Uh", &g.Uh);
    out.emplace_back(p + "bz", &g.bz);
    out.emplace_back(p + "br", &g.br);
    out.emplace_back(p + "bh", &g.bh);
  }
  for (std::size_t l = 0; l < readout.layers.size(); ++l) {
    out.emplace_back("readout.W" + std::to_string(l), &readout.layers[l].W);
    out.emplace_back("readout.b" + std::to_string(l), &readout.layers[l].b);
  }
  return out;
}

MpnnModel makeMpnn(int dim, int edgeHidden, int readoutHidden, nn::Activation head, Rng& rng) {
  MpnnModel m;
  m.dim = dim;
  m.layers = 3;
  m.inputW = nn::Mat::Zero(dim, kNodeAttrCount);
  {
    const double limit = std::sqrt(6.0 / (dim + kNodeAttrCount));
    for (int j = 0; j < kNodeAttrCount; ++j)
      for (int i = 0; i < dim; ++i) m.inputW(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  }
  m.inputB = nn::Mat::Zero(dim, 1);
  for (int t = 0; t < m.layers; ++t) {
    m.edgeNets.push_back(nn::makeMlp({1, edgeHidden, dim * dim}, nn::Activation::Relu,
                                     nn::Activation::Identity, rng));
    // messages start small so early training is dominated by node attributes
    m.edgeNets.back().layers.back().W *= 1.0 / dim;
    m.grus.push_back(nn::makeGru(dim, rng));
  }
  m.readout =
      nn::makeMlp({dim, readoutHidden, 1}, nn::Activation::Relu, head, rng);
  return m;
}

EdgeCache buildEdgeCache(const MpnnModel& model, const Eigen::MatrixXd& edgeAttrs) {
  const int n = static_cast<int>(edgeAttrs.rows());
  const int d = model.dim;
  EdgeCache cache;
  cache.n = n;
  cache.coeff.resize(model.layers);
  cache.basis.resize(model.layers);
  cache.bias.reserve(model.layers);
  cache.gateW.resize(model.layers);
  cache.gateU.resize(model.layers);
  cache.gateB.resize(model.layers);
  for (int t = 0; t < model.layers; ++t) {
    const nn::GruParams& gru = model.grus[t];
    cache.gateW[t].resize(2 * d, d);
    cache.gateW[t] << gru.Wz, gru.Wr;
    cache.gateU[t].resize(2 * d, d);
    cache.gateU[t] << gru.Uz, gru.Ur;
    cache.gateB[t].resize(2 * d);
    cache.gateB[t] << gru.bz.col(0), gru.br.col(0);
  }
  for (int t = 0; t < model.layers; ++t) {
    const nn::MlpParams& net = model.edgeNets[t];
    const nn::MlpLayer& head = net.layers.back();
    if (head.act != nn::Activation::Identity)
      throw std::invalid_argument("buildEdgeCache: edge network head must be linear");
    const int hidden = static_cast<int>(head.W.cols());
    if (t == 0) cache.hidden = hidden;
    if (hidden != cache.hidden)
      throw std::invalid_argument("buildEdgeCache: edge networks must share the hidden width");

    cache.basis[t].resize(d, hidden * d);
    for (int k = 0; k < hidden; ++k)
      cache.basis[t].middleCols(k * d, d) = Eigen::Map<const nn::Mat>(head.W.col(k).data(), d, d);
    cache.bias.emplace_back(Eigen::Map<const nn::Mat>(head.b.col(0).data(), d, d));

    nn::MlpParams prefix;  // everything before the linear head
    prefix.layers.assign(net.layers.begin(), net.layers.end() - 1);

    cache.coeff[t] = nn::Mat::Zero(n, hidden * n);
    for (int v = 0; v < n; ++v)
      for (int w = v + 1; w < n; ++w) {
        nn::Vec e(1);
        e(0) = edgeAttrs(v, w);
        const nn::Vec c = nn::mlpForward(prefix, e);
        for (int k = 0; k < hidden; ++k) {
          cache.coeff[t](v, k * n + w) = c(k);
          cache.coeff[t](w, k * n + v) = c(k);
        }
      }
  }
  return cache;
}

namespace {

void applyActivationInPlace(nn::Activation act, nn::Mat& x) {
  switch (act) {
    case nn::Activation::Identity: return;
    case nn::Activation::Relu: x = x.cwiseMax(0.0); return;
    case nn::Activation::Sigmoid: x.array() = 1.0 / (1.0 + (-x.array()).exp()); return;
    case nn::Activation::Tanh: x.array() = x.array().tanh(); return;
  }
  throw std::logic_error("bad activation tag");
}

}  // namespace

Eigen::VectorXd mpnnForward(const MpnnModel& model, const FeatureGraph& g) {
  const int n = g.size();
  const int d = model.dim;
  std::vector<nn::Vec> h(n);
  for (int v = 0; v < n; ++v)
    h[v] = model.inputW * g.nodeAttrs.row(v).transpose() + model.inputB;

  std::vector<nn::Vec> msg(n);
  for (int t = 0; t < model.layers; ++t) {
    for (int v = 0; v < n; ++v) msg[v] = nn::Vec::Zero(d);
    for (int v = 0; v < n; ++v)
      for (int w = v + 1; w < n; ++w) {
        nn::Vec e(1);
        e(0) = g.edgeAttrs(v, w);
        const nn::Vec flat = nn::mlpForward(model.edgeNets[t], e);
        const Eigen::Map<const nn::Mat> a(flat.data(), d, d);
        msg[v].noalias() += a * h[w];
        msg[w].noalias() += a * h[v];
      }
    for (int v = 0; v < n; ++v) h[v] = nn::gruStep(model.grus[t], h[v], msg[v]);
  }

  Eigen::VectorXd out(n);
  for (int v = 0; v < n; ++v) out(v) = nn::mlpForward(model.readout, h[v])(0);
  return out;
}

Eigen::VectorXd mpnnForward(const MpnnModel& model, const FeatureGraph& g, const EdgeCache& cache) {
  const int n = g.size();
  const int d = model.dim;
  if (cache.n != n) throw std::invalid_argument("mpnnForward: cache built for a different size");

  // Embeddings as columns; the message pass is one product with the cached
  // block matrix and the GRU/readout run batched over all nodes. Buffers are
  // hoisted out of the layer loop: at these sizes allocation would dominate.
  nn::Mat h(d, n);
  h.noalias() = model.inputW * g.nodeAttrs.transpose();
  h.colwise() += model.inputB.col(0);

  const int kEdge = cache.hidden;
  nn::Mat m(d, n), rest(d, n), rh(d, n), hc(d, n);
  nn::Mat zr(2 * d, n);  // rows [z; r]
  nn::Mat weighted(d, kEdge * n);
  nn::Vec hSum(d);
  for (int t = 0; t < model.layers; ++t) {
    // m_v = sum_{w != v} A_{e_vw} h_w via the basis factorization
    hSum.noalias() = h.rowwise().sum();
    rest = -h;
    rest.colwise() += hSum;  // column v: sum_{w != v} h_w
    weighted.noalias() = h * cache.coeff[t];
    m.noalias() = cache.bias[t] * rest;
    for (int k = 0; k < kEdge; ++k)
      m.noalias() += cache.basis[t].middleCols(k * d, d) * weighted.middleCols(k * n, n);

    zr.noalias() = cache.gateW[t] * m;
    zr.noalias() += cache.gateU[t] * h;
    zr.colwise() += cache.gateB[t];
    zr.array() = 1.0 / (1.0 + (-zr.array()).exp());
    rh = zr.bottomRows(d).cwiseProduct(h);
    hc.noalias() = model.grus[t].Wh * m;
    hc.noalias() += model.grus[t].Uh * rh;
    hc.colwise() += model.grus[t].bh.col(0);
    // tanh through the vectorized exp: libm tanh is scalar and dominates here
    hc.array() = 1.0 - 2.0 / ((2.0 * hc.array()).exp() + 1.0);
    h.array() = (1.0 - zr.topRows(d).array()) * h.array() +
                zr.topRows(d).array() * hc.array();
  }

  nn::Mat x = std::move(h);
  nn::Mat y;
  for (const nn::MlpLayer& layer : model.readout.layers) {
    y.resize(layer.W.rows(), n);
    y.noalias() = layer.W * x;
    y.colwise() += layer.b.col(0);
    applyActivationInPlace(layer.act, y);
    x.swap(y);
  }
  return x.row(0).transpose();
}

TapedMpnn record(ad::Tape& tape, const MpnnModel& model) {
  TapedMpnn vars;
  vars.inputW = tape.leaf(model.inputW);
  vars.inputB = tape.leaf(model.inputB);
  for (int t = 0; t < model.layers; ++t) {
    vars.edgeNets.push_back(nn::record(tape, model.edgeNets[t]));
    vars.grus.push_back(nn::record(tape, model.grus[t]));
  }
  vars.readout = nn::record(tape, model.readout);
  return vars;
}

std::vector<ad::Tape::Var> TapedMpnn::leaves(const MpnnModel& model) const {
  std::vector<ad::Tape::Var> out;
  out.push_back(inputW);
  out.push_back(inputB);
  for (int t = 0; t < model.layers; ++t) {
    for (std::size_t l = 0; l < edgeNets[t].W.size(); ++l) {
      out.push_back(edgeNets[t].W[l]);
      out.push_back(edgeNets[t].b[l]);
    }
    const nn::TapedGru& g = grus[t];
    for (ad::Tape::Var v : {g.Wz, g.Uz, g.Wr, g.Ur, g.Wh, g.Uh, g.bz, g.br, g.bh})
      out.push_back(v);
  }
  for (std::size_t l = 0; l < readout.W.size(); ++l) {
    out.push_back(readout.W[l]);
    out.push_back(readout.b[l]);
  }
  return out;
}

std::vector<ad::Tape::Var> mpnnForwardTaped(ad::Tape& tape, const TapedMpnn& vars,
                                            const MpnnModel& model, const FeatureGraph& g) {
  const int n = g.size();
  const int d = model.dim;
  std::vector<ad::Tape::Var> h(n);
  for (int v = 0; v < n; ++v) {
    const ad::Tape::Var attrs = tape.constant(g.nodeAttrs.row(v).transpose());
    h[v] = tape.add(tape.matmul(vars.inputW, attrs), vars.inputB);
  }

  for (int t = 0; t < model.layers; ++t) {
    // one message matrix per unordered pair, shared by both directions
    std::vector<ad::Tape::Var> A(static_cast<std::size_t>(n) * n);
    for (int v = 0; v < n; ++v)
      for (int w = v + 1; w < n; ++w) {
        nn::Mat e(1, 1);
        e(0, 0) = g.edgeAttrs(v, w);
        const ad::Tape::Var flat =
            nn::mlpForwardTaped(tape, vars.edgeNets[t], model.edgeNets[t], tape.constant(e));
        A[pairIndex(v, w, n)] = tape.reshape(flat, d, d);
      }
    std::vector<ad::Tape::Var> next(n);
    for (int v = 0; v < n; ++v) {
      std::vector<ad::Tape::Var> terms;
      terms.reserve(n - 1);
      for (int w = 0; w < n; ++w)
        if (w != v) terms.push_back(tape.matmul(A[pairIndex(v, w, n)], h[w]));
      const ad::Tape::Var m =
          terms.empty() ? tape.constant(nn::Mat::Zero(d, 1)) : tape.sum(terms);
      next[v] = nn::gruStepTaped(tape, vars.grus[t], h[v], m);
    }
    h = std::move(next);
  }

  std::vector<ad::Tape::Var> out(n);
  for (int v = 0; v < n; ++v)
    out[v] = nn::mlpForwardTaped(tape, vars.readout, model.readout, h[v]);
  return out;
}

void saveMpnn(const MpnnModel& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "sopcc-mpnn-v1";
  j["dim"] = model.dim;
  j["layers"] = model.layers;
  j["head"] = nn::activationName(model.readout.layers.back().act);
  std::vector<int> edgeDims{1};
  for (const auto& layer : model.edgeNets[0].layers)
    edgeDims.push_back(static_cast<int>(layer.W.rows()));
  j["edge_dims"] = edgeDims;
  std::vector<int> readoutDims{model.dim};
  for (const auto& layer : model.readout.layers)
    readoutDims.push_back(static_cast<int>(layer.W.rows()));
  j["readout_dims"] = readoutDims;
  j["ablation"] = ablationMaskNames(model.ablation);
  j["meta"] = model.meta;

  nlohmann::json params = nlohmann::json::object();
  for (auto& [name, mat] : const_cast<MpnnModel&>(model).namedParams()) {
    nlohmann::json p;
    p["shape"] = {mat->rows(), mat->cols()};
    std::vector<double> values(mat->data(), mat->data() + mat->size());
    p["values"] = std::move(values);
    params[name] = std::move(p);
  }
  j["params"] = std::move(params);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump() << '\n';
}

MpnnModel loadMpnn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", std::string()) != "sopcc-mpnn-v1")
    throw std::runtime_error("not an mpnn checkpoint: " + path);

  MpnnModel m;
  m.dim = j.at("dim").get<int>();
  m.layers = j.at("layers").get<int>();
  const auto head = nn::activationFromName(j.at("head").get<std::string>());
  const auto edgeDims = j.at("edge_dims").get<std::vector<int>>();
  const auto readoutDims = j.at("readout_dims").get<std::vector<int>>();
  m.ablation = ablationMaskFromNames(j.value("ablation", std::string()));
  m.meta = j.value("meta", nlohmann::json::object());

  Rng rng(0);  // values are overwritten below
  m.inputW = nn::Mat::Zero(m.dim, kNodeAttrCount);
  m.inputB = nn::Mat::Zero(m.dim, 1);
  for (int t = 0; t < m.layers; ++t) {
    m.edgeNets.push_back(nn::makeMlp(edgeDims, nn::Activation::Relu, nn::Activation::Identity, rng));
    m.grus.push_back(nn::makeGru(m.dim, rng));
  }
  m.readout = nn::makeMlp(readoutDims, nn::Activation::Relu, head, rng);

  const auto& params = j.at("params");
  for (auto& [name, mat] : m.namedParams()) {
    const auto& p = params.at(name);
    const auto shape = p.at("shape").get<std::vector<long>>();
    if (shape[0] != mat->rows() || shape[1] != mat->cols())
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    const auto values = p.at("values").get<std::vector<double>>();
    if (static_cast<long>(values.size()) != mat->size())
      throw std::runtime_error("checkpoint size mismatch for " + name);
    std::copy(values.begin(), values.end(), mat->data());
  }
  return m;
}

SurrogateEvaluator::SurrogateEvaluator(const MpnnModel& qNet, const MpnnModel& fNet,
                                       const Instance& inst)
    : qNet_(qNet),
      fNet_(fNet),
      qCache_(buildEdgeCache(qNet, inst.lengths)),
      fCache_(buildEdgeCache(fNet, inst.lengths)) {}

std::vector<ChildEval> SurrogateEvaluator::evaluateChildren(
    const Instance& inst, const VisitedMask& parentVisited, int parentVertex, double parentBudget,
    double rootBudget, const std::vector<double>& pathEdgeMeans, const std::vector<int>& children,
    const std::vector<double>& childBudgets, Rng& rng) {
  (void)rootBudget;
  (void)pathEdgeMeans;
  (void)childBudgets;
  (void)rng;
  const FeatureGraph gq = encodeState(inst, parentVisited, parentVertex, parentBudget,
                                      qNet_.ablation);
  const Eigen::VectorXd q = mpnnForward(qNet_, gq, qCache_);
  const Eigen::VectorXd f =
      qNet_.ablation == fNet_.ablation
          ? mpnnForward(fNet_, gq, fCache_)
          : mpnnForward(fNet_,
                        encodeState(inst, parentVisited, parentVertex, parentBudget,
                                    fNet_.ablation),
                        fCache_);
  forwardPasses_ += 2;

  std::vector<ChildEval> out;
  out.reserve(children.size());
  for (int v : children) out.push_back({q(v), f(v)});
  return out;
}

}  // namespace sopcc
