#include "hsacc/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "hsacc/kernels.hpp"

namespace hsacc::ad {

Var Tape::input(Eigen::MatrixXd value) { return emit(std::move(value), nullptr); }

double Tape::scalar(Var v) const {
  const auto& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw std::invalid_argument("scalar: node is not 1x1");
  return m(0, 0);
}

Var Tape::emit(Eigen::MatrixXd value, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::matmul(Var a, Var b, bool trans_a, bool trans_b) {
  Eigen::MatrixXd c = kernels::matmul(value(a), value(b), trans_a, trans_b);
  Var out{static_cast<int>(nodes_.size())};
  return emit(std::move(c), [a, b, trans_a, trans_b, out](Tape& t) {
    const Eigen::MatrixXd& g = t.nodes_[out.idx].grad;
    const Eigen::MatrixXd& va = t.nodes_[a.idx].value;
    const Eigen::MatrixXd& vb = t.nodes_[b.idx].value;
    if (!trans_a && !trans_b) {
      t.accum(a.idx, kernels::matmul(g, vb, false, true));
      t.accum(b.idx, kernels::matmul(va, g, true, false));
    } else if (trans_a) {  // c = a^T b
      t.accum(a.idx, kernels::matmul(vb, g, false, true));
      t.accum(b.idx, kernels::matmul(va, g, false, false));
    } else {  // c = a b^T
      t.accum(a.idx, kernels::matmul(g, vb, false, false));
      t.accum(b.idx, kernels::matmul(g, va, true, false));
    }
  });
}

Var Tape::add(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw std::invalid_argument("add: shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a) + value(b), [a, b, out](Tape& t) {
    t.accum(a.idx, t.nodes_[out.idx].grad);
    t.accum(b.idx, t.nodes_[out.idx].grad);
  });
}

Var Tape::sub(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw std::invalid_argument("sub: shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a) - value(b), [a, b, out](Tape& t) {
    t.accum(a.idx, t.nodes_[out.idx].grad);
    t.accum(b.idx, -t.nodes_[out.idx].grad);
  });
}

Var Tape::mul(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw std::invalid_argument("mul: shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).cwiseProduct(value(b)), [a, b, out](Tape& t) {
    const auto& g = t.nodes_[out.idx].grad;
    t.accum(a.idx, g.cwiseProduct(t.nodes_[b.idx].value));
    t.accum(b.idx, g.cwiseProduct(t.nodes_[a.idx].value));
  });
}

Var Tape::div(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw std::invalid_argument("div: shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).cwiseQuotient(value(b)), [a, b, out](Tape& t) {
    const auto& g = t.nodes_[out.idx].grad;
    const auto& vb = t.nodes_[b.idx].value;
    const auto& vo = t.nodes_[out.idx].value;
    t.accum(a.idx, g.cwiseQuotient(vb));
    t.accum(b.idx, -g.cwiseProduct(vo).cwiseQuotient(vb));
  });
}

Var Tape::add_rowvec(Var a, Var r) {
  if (value(r).rows() != 1 || value(r).cols() != value(a).cols())
    throw std::invalid_argument("add_rowvec: shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).rowwise() + value(r).row(0), [a, r, out](Tape& t) {
    const auto& g = t.nodes_[out.idx].grad;
    t.accum(a.idx, g);
    t.accum(r.idx, g.colwise().sum());
  });
}

Var Tape::add_colvec(Var a, Var c) {
  if (value(c).cols() != 1 || value(c).rows() != value(a).rows())
    throw std::invalid_argument("add_colvec: shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).colwise() + value(c).col(0), [a, c, out](Tape& t) {
    const auto& g = t.nodes_[out.idx].grad;
    t.accum(a.idx, g);
    t.accum(c.idx, g.rowwise().sum());
  });
}

Var Tape::scale(Var a, double s) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a) * s, [a, s, out](Tape& t) {
    t.accum(a.idx, t.nodes_[out.idx].grad * s);
  });
}

Var Tape::transpose(Var a) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).transpose(), [a, out](Tape& t) {
    t.accum(a.idx, t.nodes_[out.idx].grad.transpose());
  });
}

Var Tape::relu(Var a) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).cwiseMax(0.0), [a, out](Tape& t) {
    const auto& va = t.nodes_[a.idx].value;
    const auto& g = t.nodes_[out.idx].grad;
    t.accum(a.idx, ((va.array() > 0.0).select(g.array(), 0.0)).matrix());
  });
}

Var Tape::exp(Var a) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).array().exp().matrix(), [a, out](Tape& t) {
    t.accum(a.idx, t.nodes_[out.idx].grad.cwiseProduct(t.nodes_[out.idx].value));
  });
}

Var Tape::log(Var a) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).array().log().matrix(), [a, out](Tape& t) {
    t.accum(a.idx, t.nodes_[out.idx].grad.cwiseQuotient(t.nodes_[a.idx].value));
  });
}

Var Tape::clamp_min(Var a, double lo) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).cwiseMax(lo), [a, lo, out](Tape& t) {
    const auto& va = t.nodes_[a.idx].value;
    const auto& g = t.nodes_[out.idx].grad;
    t.accum(a.idx, ((va.array() > lo).select(g.array(), 0.0)).matrix());
  });
}

Var Tape::softmax_rows(Var a) {
  const auto& va = value(a);
  Eigen::MatrixXd y(va.rows(), va.cols());
  for (Eigen::Index i = 0; i < va.rows(); ++i) {
    const double m = va.row(i).maxCoeff();
    y.row(i) = (va.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  Var out{static_cast<int>(nodes_.size())};
  return emit(std::move(y), [a, out](Tape& t) {
    const auto& yv = t.nodes_[out.idx].value;
    const auto& g = t.nodes_[out.idx].grad;
    Eigen::VectorXd dot = (g.cwiseProduct(yv)).rowwise().sum();
    Eigen::MatrixXd centered = g.colwise() - dot;
    t.accum(a.idx, yv.cwiseProduct(centered));
  });
}

Var Tape::sum(Var a) {
  Eigen::MatrixXd s(1, 1);
  s(0, 0) = value(a).sum();
  Var out{static_cast<int>(nodes_.size())};
  return emit(std::move(s), [a, out](Tape& t) {
    const double g = t.nodes_[out.idx].grad(0, 0);
    const auto& va = t.nodes_[a.idx].value;
    t.accum(a.idx, Eigen::MatrixXd::Constant(va.rows(), va.cols(), g));
  });
}

Var Tape::rowsum(Var a) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).rowwise().sum(), [a, out](Tape& t) {
    const auto& g = t.nodes_[out.idx].grad;  // N x 1
    const auto& va = t.nodes_[a.idx].value;
    t.accum(a.idx, g * Eigen::RowVectorXd::Ones(va.cols()));
  });
}

Var Tape::colsum(Var a) {
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a).colwise().sum(), [a, out](Tape& t) {
    const auto& g = t.nodes_[out.idx].grad;  // 1 x D
    const auto& va = t.nodes_[a.idx].value;
    t.accum(a.idx, Eigen::VectorXd::Ones(va.rows()) * g);
  });
}

Var Tape::select_rows(Var a, std::vector<int> rows) {
  const auto& va = value(a);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), va.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= va.rows())
      throw std::out_of_range("select_rows: index out of range");
    y.row(static_cast<Eigen::Index>(i)) = va.row(rows[i]);
  }
  Var out{static_cast<int>(nodes_.size())};
  return emit(std::move(y), [a, rows = std::move(rows), out](Tape& t) {
    const auto& g = t.nodes_[out.idx].grad;
    auto& ga = t.nodes_[a.idx].grad;
    for (size_t i = 0; i < rows.size(); ++i)
      ga.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var Tape::div_by_scalar(Var a, Var s) {
  if (value(s).rows() != 1 || value(s).cols() != 1)
    throw std::invalid_argument("div_by_scalar: divisor must be 1x1");
  const double sv = value(s)(0, 0);
  Var out{static_cast<int>(nodes_.size())};
  return emit(value(a) / sv, [a, s, out](Tape& t) {
    const double sv2 = t.nodes_[s.idx].value(0, 0);
    const auto& g = t.nodes_[out.idx].grad;
    t.accum(a.idx, g / sv2);
    Eigen::MatrixXd gs(1, 1);
    gs(0, 0) = -(g.cwiseProduct(t.nodes_[out.idx].value)).sum() / sv2;
    t.accum(s.idx, gs);
  });
}

Var Tape::squared_norm(Var a) {
  Eigen::MatrixXd s(1, 1);
  s(0, 0) = value(a).squaredNorm();
  Var out{static_cast<int>(nodes_.size())};
  return emit(std::move(s), [a, out](Tape& t) {
    t.accum(a.idx, 2.0 * t.nodes_[out.idx].grad(0, 0) * t.nodes_[a.idx].value);
  });
}

void Tape::backward(Var loss) {
  auto& ln = nodes_[loss.idx];
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw std::invalid_argument("backward: loss must be 1x1");
  ln.grad(0, 0) += 1.0;
  for (int i = loss.idx; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back(*this);
}

}  // namespace hsacc::ad
