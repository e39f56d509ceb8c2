#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sopcc::ad {

using Mat = Eigen::MatrixXd;

/// Reverse-mode computation tape over dense matrices (column vectors are
/// n x 1). A tape is scoped to a single training example: record the forward
/// pass, call backward() on a scalar result, read gradients off the leaves.
class Tape {
 public:
  struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
  };

  /// Leaf with gradient tracking (parameters and inputs).
  Var leaf(Mat value);
  /// Constant (targets, masks); gradients are still accumulated but unused.
  Var constant(Mat value) { return leaf(std::move(value)); }

  const Mat& value(Var v) const { return nodes_[v.idx].value; }
  const Mat& grad(Var v) const { return nodes_[v.idx].grad; }
  double scalar(Var v) const { return nodes_[v.idx].value(0, 0); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var matmul(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double s);
  Var oneMinus(Var a);  // 1 - a, elementwise
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var square(Var a);
  Var reshape(Var a, int rows, int cols);
  Var sum(const std::vector<Var>& terms);  // elementwise sum, all same shape
  Var sumEntries(Var a);                   // 1x1 total of all entries

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. loss is 1x1.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&, const Mat&)> pull;  // routes upstream grad to parents
  };

  Var push(Mat value, std::function<void(Tape&, const Mat&)> pull);
  void accumulate(Var v, const Mat& g) { nodes_[v.idx].grad += g; }

  std::vector<Node> nodes_;
};

}  // namespace sopcc::ad
