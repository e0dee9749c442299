#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

// Minimal reverse-mode autodiff over dense matrices. A Tape owns the graph;
// Var is an index into it. Build the loss bottom-up, call backward() on a
// 1x1 node, then read gradients of the leaves.

namespace hsacc::ad {

class Tape;

struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

class Tape {
 public:
  // Leaf node. Gradients are accumulated for every node; leaves are just
  // nodes without a backward function.
  Var input(Eigen::MatrixXd value);

  const Eigen::MatrixXd& value(Var v) const { return nodes_[v.idx].value; }
  const Eigen::MatrixXd& grad(Var v) const { return nodes_[v.idx].grad; }
  double scalar(Var v) const;

  Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var div(Var a, Var b);  // elementwise
  Var add_rowvec(Var a, Var r);  // r: 1 x C, broadcast over rows
  Var add_colvec(Var a, Var c);  // c: N x 1, broadcast over columns
  Var scale(Var a, double s);
  Var neg(Var a) { return scale(a, -1.0); }
  Var transpose(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var clamp_min(Var a, double lo);  // zero gradient where clamped
  Var softmax_rows(Var a);
  Var sum(Var a);      // 1x1
  Var rowsum(Var a);   // N x 1
  Var colsum(Var a);   // 1 x D
  Var select_rows(Var a, std::vector<int> rows);
  Var div_by_scalar(Var a, Var s);  // s: 1x1 node
  Var squared_norm(Var a);          // 1x1, sum of squares

  // Seeds `loss` (must be 1x1) with gradient 1 and propagates to all leaves.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    std::function<void(Tape&)> back;  // pushes this node's grad to parents
  };

  Var emit(Eigen::MatrixXd value, std::function<void(Tape&)> back);
  void accum(int idx, const Eigen::MatrixXd& g) { nodes_[idx].grad += g; }

  std::vector<Node> nodes_;
};

}  // namespace hsacc::ad
