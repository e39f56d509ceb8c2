#include "sopcc/autodiff.hpp"

#include <stdexcept>

namespace sopcc::ad {

Tape::Var Tape::push(Mat value, std::function<void(Tape&, const Mat&)> pull) {
  Node node;
  node.grad = Mat::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  node.pull = std::move(pull);
  nodes_.push_back(std::move(node));
  return {static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::leaf(Mat value) { return push(std::move(value), nullptr); }

Tape::Var Tape::add(Var a, Var b) {
  return push(value(a) + value(b), [a, b](Tape& t, const Mat& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Tape::Var Tape::sub(Var a, Var b) {
  return push(value(a) - value(b), [a, b](Tape& t, const Mat& g) {
    t.accumulate(a, g);
    t.nodes_[b.idx].grad -= g;
  });
}

Tape::Var Tape::matmul(Var a, Var b) {
  return push(value(a) * value(b), [a, b](Tape& t, const Mat& g) {
    t.nodes_[a.idx].grad.noalias() += g * t.value(b).transpose();
    t.nodes_[b.idx].grad.noalias() += t.value(a).transpose() * g;
  });
}

Tape::Var Tape::hadamard(Var a, Var b) {
  return push(value(a).cwiseProduct(value(b)), [a, b](Tape& t, const Mat& g) {
    t.nodes_[a.idx].grad += g.cwiseProduct(t.value(b));
    t.nodes_[b.idx].grad += g.cwiseProduct(t.value(a));
  });
}

Tape::Var Tape::scale(Var a, double s) {
  return push(value(a) * s, [a, s](Tape& t, const Mat& g) { t.nodes_[a.idx].grad += g * s; });
}

Tape::Var Tape::oneMinus(Var a) {
  return push(Mat::Ones(value(a).rows(), value(a).cols()) - value(a),
              [a](Tape& t, const Mat& g) { t.nodes_[a.idx].grad -= g; });
}

Tape::Var Tape::sigmoid(Var a) {
  Mat s = value(a).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  Var out = push(std::move(s), nullptr);
  nodes_[out.idx].pull = [a, out](Tape& t, const Mat& g) {
    const Mat& s = t.value(out);
    t.nodes_[a.idx].grad += g.cwiseProduct(s.cwiseProduct(Mat::Ones(s.rows(), s.cols()) - s));
  };
  return out;
}

Tape::Var Tape::tanh(Var a) {
  Var out = push(value(a).array().tanh().matrix(), nullptr);
  nodes_[out.idx].pull = [a, out](Tape& t, const Mat& g) {
    const Mat& y = t.value(out);
    t.nodes_[a.idx].grad += g.cwiseProduct(Mat::Ones(y.rows(), y.cols()) - y.cwiseProduct(y));
  };
  return out;
}

Tape::Var Tape::relu(Var a) {
  return push(value(a).cwiseMax(0.0), [a](Tape& t, const Mat& g) {
    t.nodes_[a.idx].grad +=
        g.cwiseProduct(t.value(a).unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }));
  });
}

Tape::Var Tape::square(Var a) {
  return push(value(a).cwiseProduct(value(a)), [a](Tape& t, const Mat& g) {
    t.nodes_[a.idx].grad += 2.0 * g.cwiseProduct(t.value(a));
  });
}

Tape::Var Tape::reshape(Var a, int rows, int cols) {
  const Mat& v = value(a);
  if (v.size() != rows * cols) throw std::invalid_argument("reshape: size mismatch");
  Mat out = Eigen::Map<const Mat>(v.data(), rows, cols);
  const int ar = static_cast<int>(v.rows());
  const int ac = static_cast<int>(v.cols());
  return push(std::move(out), [a, ar, ac](Tape& t, const Mat& g) {
    t.nodes_[a.idx].grad += Eigen::Map<const Mat>(g.data(), ar, ac);
  });
}

Tape::Var Tape::sum(const std::vector<Var>& terms) {
  if (terms.empty()) throw std::invalid_argument("sum: empty term list");
  Mat total = value(terms[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) total += value(terms[i]);
  std::vector<Var> parents = terms;
  return push(std::move(total), [parents](Tape& t, const Mat& g) {
    for (Var p : parents) t.accumulate(p, g);
  });
}

Tape::Var Tape::sumEntries(Var a) {
  Mat out(1, 1);
  out(0, 0) = value(a).sum();
  return push(std::move(out), [a](Tape& t, const Mat& g) {
    t.nodes_[a.idx].grad.array() += g(0, 0);
  });
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  nodes_[loss.idx].grad(0, 0) = 1.0;
  for (int i = loss.idx; i >= 0; --i)
    if (nodes_[i].pull) nodes_[i].pull(*this, nodes_[i].grad);
}

}  // namespace sopcc::ad
