#pragma once

#include <string>
#include <vector>

#include "sopcc/autodiff.hpp"
#include "sopcc/rng.hpp"

namespace sopcc::nn {

using ad::Mat;
using Vec = Eigen::VectorXd;

enum class Activation { Identity, Relu, Sigmoid, Tanh };

Activation activationFromName(const std::string& name);
std::string activationName(Activation act);

struct MlpLayer {
  Mat W;
  Mat b;  // column
  Activation act = Activation::Identity;
};

struct MlpParams {
  std::vector<MlpLayer> layers;

  int inputDim() const { return static_cast<int>(layers.front().W.cols()); }
  int outputDim() const { return static_cast<int>(layers.back().W.rows()); }
};

/// dims = {in, hidden..., out}; hidden layers use `hidden`, the last `head`.
MlpParams makeMlp(const std::vector<int>& dims, Activation hidden, Activation head, Rng& rng);

Vec mlpForward(const MlpParams& mlp, const Vec& x);

/// GRU cell with square D x D weights:
///   z = sigma(Wz x + Uz h + bz), r = sigma(Wr x + Ur h + br),
///   hc = tanh(Wh x + Uh (r . h) + bh), h' = (1 - z) . h + z . hc
struct GruParams {
  Mat Wz, Uz, Wr, Ur, Wh, Uh;
  Mat bz, br, bh;  // columns

  int dim() const { return static_cast<int>(Wz.rows()); }
};

GruParams makeGru(int dim, Rng& rng);

Vec gruStep(const GruParams& gru, const Vec& hPrev, const Vec& x);

// --- taped (trainable) counterparts -----------------------------------------

struct TapedMlp {
  std::vector<ad::Tape::Var> W, b;
};
struct TapedGru {
  ad::Tape::Var Wz, Uz, Wr, Ur, Wh, Uh, bz, br, bh;
};

TapedMlp record(ad::Tape& tape, const MlpParams& mlp);
TapedGru record(ad::Tape& tape, const GruParams& gru);

ad::Tape::Var mlpForwardTaped(ad::Tape& tape, const TapedMlp& vars, const MlpParams& mlp,
                              ad::Tape::Var x);
ad::Tape::Var gruStepTaped(ad::Tape& tape, const TapedGru& vars, ad::Tape::Var hPrev,
                           ad::Tape::Var x);

// --- loss and optimizer ------------------------------------------------------

/// Mean squared error over entries where mask is 1; 0 for an all-zero mask.
double mseLoss(const Vec& pred, const Vec& target, const Vec& mask);

/// Adaptive-moment optimizer with bias correction.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int step = 0;
  std::vector<Mat> m, v;
};

/// One update over the full parameter list. Throws TrainingDivergedError on a
/// non-finite gradient. Parameter/gradient order must stay fixed across calls.
void adamStep(AdamState& state, const std::vector<Mat*>& params, const std::vector<Mat>& grads);

}  // namespace sopcc::nn
