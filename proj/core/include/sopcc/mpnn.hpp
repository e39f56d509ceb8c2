#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "sopcc/instance.hpp"
#include "sopcc/mcts.hpp"
#include "sopcc/nn.hpp"

namespace sopcc {

/// Fixed order of the 8 per-vertex attributes.
enum NodeAttr : int {
  kAttrVisited = 0,
  kAttrX = 1,
  kAttrY = 2,
  kAttrReward = 3,
  kAttrBudget = 4,
  kAttrIsStart = 5,
  kAttrIsGoal = 6,
  kAttrIsCurrent = 7,
};
inline constexpr int kNodeAttrCount = 8;

/// Attribute columns zeroed for an ablation study; true = column removed.
using AblationMask = std::array<bool, 8>;

/// Parses names like "start,goal" or "current"; throws on unknown attributes.
AblationMask ablationMaskFromNames(const std::string& commaSeparated);
std::string ablationMaskNames(const AblationMask& mask);

/// Network input: n x 8 node attributes plus scalar edge attributes.
struct FeatureGraph {
  Eigen::MatrixXd nodeAttrs;  // n x 8
  Eigen::MatrixXd edgeAttrs;  // n x n Euclidean lengths (complete graph)

  int size() const { return static_cast<int>(nodeAttrs.rows()); }
};

/// Encodes one planning state as a FeatureGraph; masked attribute columns are
/// zeroed after filling.
FeatureGraph encodeState(const Instance& inst, const VisitedMask& visited, int currentVertex,
                         double remainingBudget, const AblationMask& mask = {});

/// Edge-conditioned message-passing regressor: per-layer edge network mapping
/// the scalar edge attribute to a D x D message matrix, GRU node updates, and
/// a per-node readout head (identity for Q, sigmoid for F).
struct MpnnModel {
  int dim = 32;                       // embedding width D
  int layers = 3;                     // message passing rounds T
  nn::Mat inputW;                     // D x 8 learned input projection
  nn::Mat inputB;                     // D x 1
  std::vector<nn::MlpParams> edgeNets;  // T networks, 1 -> hidden -> D*D
  std::vector<nn::GruParams> grus;      // T update cells
  nn::MlpParams readout;                // D -> hidden -> 1
  AblationMask ablation{};              // mask applied at training time
  nlohmann::json meta;                  // role, training provenance

  std::vector<std::pair<std::string, nn::Mat*>> namedParams();
};

/// Fresh model; head is Identity for the Q-net, Sigmoid for the F-net.
MpnnModel makeMpnn(int dim, int edgeHidden, int readoutHidden, nn::Activation head, Rng& rng);

/// Per-instance cache of the edge message matrices (they depend only on the
/// edge lengths, which never change during a solve).
/// The edge network is linear in its last layer, so every message matrix
/// factors as A_{e_vw} = B_0 + sum_k c_k(e_vw) B_k with the scalars c_k being
/// the last hidden activations. Caching the n x n coefficient matrix per
/// hidden unit and the D x D basis matrices keeps the message pass a handful
/// of small cache-resident products instead of streaming n^2 D x D matrices.
/// Both factors are stored as horizontal stacks over k so the message pass is
/// two large matrix products instead of one small product per hidden unit.
struct EdgeCache {
  std::vector<nn::Mat> coeff;  // [layer]: n x (K n); block k is symmetric, zero diagonal
  std::vector<nn::Mat> basis;  // [layer]: D x (K D)
  std::vector<nn::Mat> bias;   // [layer]: D x D (the head bias B_0)
  // z/r gate weights stacked row-wise so both sigmoid gates come out of two
  // products and one full-matrix activation (small-matrix call overhead and
  // non-contiguous block activations dominate at these sizes).
  std::vector<nn::Mat> gateW;  // [layer]: 2D x D, rows [Wz; Wr]
  std::vector<nn::Mat> gateU;  // [layer]: 2D x D, rows [Uz; Ur]
  std::vector<nn::Vec> gateB;  // [layer]: 2D, [bz; br]
  int n = 0;
  int hidden = 0;  // K, the edge network's last hidden width
};
EdgeCache buildEdgeCache(const MpnnModel& model, const Eigen::MatrixXd& edgeAttrs);

/// Per-node outputs. The cached variant must agree with the plain one.
Eigen::VectorXd mpnnForward(const MpnnModel& model, const FeatureGraph& g);
Eigen::VectorXd mpnnForward(const MpnnModel& model, const FeatureGraph& g, const EdgeCache& cache);

/// Taped forward for training; returns one scalar Var per node.
struct TapedMpnn {
  ad::Tape::Var inputW, inputB;
  std::vector<nn::TapedMlp> edgeNets;
  std::vector<nn::TapedGru> grus;
  nn::TapedMlp readout;

  /// Leaves in namedParams() order, for gradient extraction.
  std::vector<ad::Tape::Var> leaves(const MpnnModel& model) const;
};
TapedMpnn record(ad::Tape& tape, const MpnnModel& model);
std::vector<ad::Tape::Var> mpnnForwardTaped(ad::Tape& tape, const TapedMpnn& vars,
                                            const MpnnModel& model, const FeatureGraph& g);

/// Checkpoint I/O: JSON with architecture metadata, the ablation mask, and
/// flat value arrays per named parameter. Round-trips exactly.
void saveMpnn(const MpnnModel& model, const std::string& path);
MpnnModel loadMpnn(const std::string& path);

/// Surrogate (Q, F) evaluation for the tree search: one feature graph per
/// parent state, one forward pass per network, child values read from the
/// child nodes' outputs.
class SurrogateEvaluator final : public Evaluator {
 public:
  SurrogateEvaluator(const MpnnModel& qNet, const MpnnModel& fNet, const Instance& inst);

  std::vector<ChildEval> evaluateChildren(const Instance& inst, const VisitedMask& parentVisited,
                                          int parentVertex, double parentBudget, double rootBudget,
                                          const std::vector<double>& pathEdgeMeans,
                                          const std::vector<int>& children,
                                          const std::vector<double>& childBudgets,
                                          Rng& rng) override;

  long forwardPassCount() const { return forwardPasses_; }

 private:
  const MpnnModel& qNet_;
  const MpnnModel& fNet_;
  EdgeCache qCache_;
  EdgeCache fCache_;
  long forwardPasses_ = 0;
};

}  // namespace sopcc
