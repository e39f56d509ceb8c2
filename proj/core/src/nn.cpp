#include "sopcc/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "sopcc/errors.hpp"

namespace sopcc::nn {

Activation activationFromName(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activationName(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
  }
  throw std::logic_error("bad activation tag");
}

namespace {

Mat glorot(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  return m;
}

Vec applyActivation(Activation act, Vec x) {
  switch (act) {
    case Activation::Identity: return x;
    case Activation::Relu: return x.cwiseMax(0.0);
    case Activation::Sigmoid: return (1.0 / (1.0 + (-x.array()).exp())).matrix();
    case Activation::Tanh: return x.array().tanh().matrix();
  }
  throw std::logic_error("bad activation tag");
}

ad::Tape::Var applyActivationTaped(ad::Tape& t, Activation act, ad::Tape::Var x) {
  switch (act) {
    case Activation::Identity: return x;
    case Activation::Relu: return t.relu(x);
    case Activation::Sigmoid: return t.sigmoid(x);
    case Activation::Tanh: return t.tanh(x);
  }
  throw std::logic_error("bad activation tag");
}

}  // namespace

MlpParams makeMlp(const std::vector<int>& dims, Activation hidden, Activation head, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("makeMlp: need at least one layer");
  MlpParams mlp;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    MlpLayer layer;
    layer.W = glorot(dims[l + 1], dims[l], rng);
    layer.b = Mat::Zero(dims[l + 1], 1);
    layer.act = l + 2 == dims.size() ? head : hidden;
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

Vec mlpForward(const MlpParams& mlp, const Vec& x) {
  if (x.size() != mlp.inputDim()) throw std::invalid_argument("mlpForward: dimension mismatch");
  Vec h = x;
  for (const MlpLayer& layer : mlp.layers) h = applyActivation(layer.act, layer.W * h + layer.b);
  return h;
}

GruParams makeGru(int dim, Rng& rng) {
  GruParams g;
  g.Wz = glorot(dim, dim, rng);
  g.Uz = glorot(dim, dim, rng);
  g.Wr = glorot(dim, dim, rng);
  g.Ur = glorot(dim, dim, rng);
  g.Wh = glorot(dim, dim, rng);
  g.Uh = glorot(dim, dim, rng);
  g.bz = Mat::Zero(dim, 1);
  g.br = Mat::Zero(dim, 1);
  g.bh = Mat::Zero(dim, 1);
  return g;
}

Vec gruStep(const GruParams& gru, const Vec& hPrev, const Vec& x) {
  if (hPrev.size() != gru.dim() || x.size() != gru.dim())
    throw std::invalid_argument("gruStep: dimension mismatch");
  const Vec z = applyActivation(Activation::Sigmoid, gru.Wz * x + gru.Uz * hPrev + gru.bz);
  const Vec r = applyActivation(Activation::Sigmoid, gru.Wr * x + gru.Ur * hPrev + gru.br);
  const Vec hc =
      applyActivation(Activation::Tanh, gru.Wh * x + gru.Uh * r.cwiseProduct(hPrev) + gru.bh);
  return (Vec::Ones(gru.dim()) - z).cwiseProduct(hPrev) + z.cwiseProduct(hc);
}

TapedMlp record(ad::Tape& tape, const MlpParams& mlp) {
  TapedMlp vars;
  for (const MlpLayer& layer : mlp.layers) {
    vars.W.push_back(tape.leaf(layer.W));
    vars.b.push_back(tape.leaf(layer.b));
  }
  return vars;
}

TapedGru record(ad::Tape& tape, const GruParams& gru) {
  return {tape.leaf(gru.Wz), tape.leaf(gru.Uz), tape.leaf(gru.Wr),
          tape.leaf(gru.Ur), tape.leaf(gru.Wh), tape.leaf(gru.Uh),
          tape.leaf(gru.bz), tape.leaf(gru.br), tape.leaf(gru.bh)};
}

ad::Tape::Var mlpForwardTaped(ad::Tape& tape, const TapedMlp& vars, const MlpParams& mlp,
                              ad::Tape::Var x) {
  ad::Tape::Var h = x;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    h = tape.add(tape.matmul(vars.W[l], h), vars.b[l]);
    h = applyActivationTaped(tape, mlp.layers[l].act, h);
  }
  return h;
}

ad::Tape::Var gruStepTaped(ad::Tape& tape, const TapedGru& vars, ad::Tape::Var hPrev,
                           ad::Tape::Var x) {
  auto affine = [&](ad::Tape::Var W, ad::Tape::Var U, ad::Tape::Var b, ad::Tape::Var h) {
    return tape.add(tape.add(tape.matmul(W, x), tape.matmul(U, h)), b);
  };
  const ad::Tape::Var z = tape.sigmoid(affine(vars.Wz, vars.Uz, vars.bz, hPrev));
  const ad::Tape::Var r = tape.sigmoid(affine(vars.Wr, vars.Ur, vars.br, hPrev));
  const ad::Tape::Var rh = tape.hadamard(r, hPrev);
  const ad::Tape::Var hc =
      tape.tanh(tape.add(tape.add(tape.matmul(vars.Wh, x), tape.matmul(vars.Uh, rh)), vars.bh));
  return tape.add(tape.hadamard(tape.oneMinus(z), hPrev), tape.hadamard(z, hc));
}

double mseLoss(const Vec& pred, const Vec& target, const Vec& mask) {
  if (pred.size() != target.size() || pred.size() != mask.size())
    throw std::invalid_argument("mseLoss: length mismatch");
  const double count = mask.sum();
  if (count == 0.0) return 0.0;
  const Vec diff = (pred - target).cwiseProduct(mask);
  return diff.squaredNorm() / count;
}

void adamStep(AdamState& state, const std::vector<Mat*>& params, const std::vector<Mat>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("adamStep: list size mismatch");
  if (state.m.empty()) {
    for (const Mat* p : params) {
      state.m.emplace_back(Mat::Zero(p->rows(), p->cols()));
      state.v.emplace_back(Mat::Zero(p->rows(), p->cols()));
    }
  }
  for (const Mat& g : grads)
    if (!g.allFinite()) throw TrainingDivergedError("non-finite gradient in adamStep");

  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, state.step);
  const double c2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i].cwiseProduct(grads[i]);
    const Mat mHat = state.m[i] / c1;
    const Mat vHat = state.v[i] / c2;
    params[i]->array() -= state.lr * mHat.array() / (vHat.array().sqrt() + state.eps);
  }
}

}  // namespace sopcc::nn
