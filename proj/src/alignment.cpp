#include "hsacc/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hsacc/kernels.hpp"

namespace hsacc::alignment {

namespace {
void check_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}
}  // namespace

ad::Var mutual_information_loss(ad::Tape& t, ad::Var z1, ad::Var z2) {
  const auto& v1 = t.value(z1);
  const auto& v2 = t.value(z2);
  if (v1.rows() != v2.rows() || v1.cols() != v2.cols())
    throw std::invalid_argument("mutual_information_loss: shape mismatch");
  if (v1.rows() == 0) throw std::invalid_argument("mutual_information_loss: empty input");

  const double n = static_cast<double>(v1.rows());
  ad::Var s1 = t.softmax_rows(z1);
  ad::Var s2 = t.softmax_rows(z2);
  ad::Var p = t.scale(t.matmul(s1, s2, /*trans_a=*/true), 1.0 / n);  // D x D
  ad::Var sym = t.scale(t.add(p, t.transpose(p)), 0.5);
  ad::Var clamped = t.clamp_min(sym, kProbFloor);
  ad::Var pn = t.div_by_scalar(clamped, t.sum(clamped));
  ad::Var pr = t.rowsum(pn);  // D x 1
  ad::Var pc = t.colsum(pn);  // 1 x D
  ad::Var denom = t.matmul(pr, pc);  // outer product, D x D
  ad::Var ratio = t.log(t.div(pn, denom));
  return t.neg(t.sum(t.mul(pn, ratio)));
}

double mutual_information_loss(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2) {
  ad::Tape t;
  return t.scalar(mutual_information_loss(t, t.input(z1), t.input(z2)));
}

JointDistribution joint_distribution(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2) {
  check_same_shape(z1, z2, "joint_distribution");
  ad::Tape t;
  ad::Var s1 = t.softmax_rows(t.input(z1));
  ad::Var s2 = t.softmax_rows(t.input(z2));
  Eigen::MatrixXd p = kernels::matmul(t.value(s1), t.value(s2), true, false) / z1.rows();
  p = 0.5 * (p + p.transpose().eval());
  p = p.cwiseMax(kProbFloor);
  p /= p.sum();
  JointDistribution jd;
  jd.p = p;
  jd.row_marginal = p.rowwise().sum();
  jd.col_marginal = p.colwise().sum();
  return jd;
}

ad::Var pairwise_mi_loss(ad::Tape& t, const std::vector<ad::Var>& latents) {
  const int v = static_cast<int>(latents.size());
  if (v < 2) throw std::invalid_argument("pairwise_mi_loss: need at least 2 views");
  ad::Var acc;
  for (int a = 0; a < v; ++a)
    for (int b = a + 1; b < v; ++b) {
      ad::Var term = mutual_information_loss(t, latents[a], latents[b]);
      acc = acc.valid() ? t.add(acc, term) : term;
    }
  return t.scale(acc, 2.0 / (static_cast<double>(v) * (v - 1)));
}

double pairwise_mi_loss(const std::vector<Eigen::MatrixXd>& latents) {
  ad::Tape t;
  std::vector<ad::Var> vars;
  for (const auto& z : latents) vars.push_back(t.input(z));
  return t.scalar(pairwise_mi_loss(t, vars));
}

double view_discrepancy(const Eigen::MatrixXd& z, const Eigen::MatrixXd& r) {
  check_same_shape(z, r, "view_discrepancy");
  if (z.rows() == 0) throw std::invalid_argument("view_discrepancy: empty input");
  const double n = static_cast<double>(z.rows());
  const Eigen::VectorXd sz = z.colwise().sum();
  const Eigen::VectorXd sr = r.colwise().sum();
  // (1/N^2)(sum_ij z_i.z_j + sum_ij r_i.r_j - 2 sum_ij z_i.r_j)
  return (sz.squaredNorm() + sr.squaredNorm() - 2.0 * sz.dot(sr)) / (n * n);
}

ViewWeights view_weights(const Eigen::VectorXd& discrepancies) {
  if (!discrepancies.allFinite())
    throw std::invalid_argument("view_weights: non-finite discrepancy");
  ViewWeights vw;
  vw.discrepancies = discrepancies;
  const Eigen::ArrayXd neg = -discrepancies.array();
  const double m = neg.maxCoeff();
  Eigen::ArrayXd e = (neg - m).exp();
  vw.w = (e / e.sum()).matrix();
  return vw;
}

LatentBundle fuse(const std::vector<Eigen::MatrixXd>& latents) {
  if (latents.empty()) throw std::invalid_argument("fuse: no views");
  Eigen::MatrixXd r = latents[0];
  for (size_t v = 1; v < latents.size(); ++v) {
    check_same_shape(latents[0], latents[v], "fuse");
    r += latents[v];
  }
  r /= static_cast<double>(latents.size());
  Eigen::VectorXd d(latents.size());
  for (size_t v = 0; v < latents.size(); ++v)
    d(static_cast<Eigen::Index>(v)) = view_discrepancy(latents[v], r);
  return fuse(latents, view_weights(d));
}

LatentBundle fuse(const std::vector<Eigen::MatrixXd>& latents, const ViewWeights& weights) {
  if (latents.empty()) throw std::invalid_argument("fuse: no views");
  if (weights.w.size() != static_cast<Eigen::Index>(latents.size()))
    throw std::invalid_argument("fuse: weight count mismatch");
  LatentBundle b;
  b.z = latents;
  b.weights = weights;
  b.r = latents[0];
  b.h = weights.w(0) * latents[0];
  for (size_t v = 1; v < latents.size(); ++v) {
    check_same_shape(latents[0], latents[v], "fuse");
    b.r += latents[v];
    b.h += weights.w(static_cast<Eigen::Index>(v)) * latents[v];
  }
  b.r /= static_cast<double>(latents.size());
  return b;
}

double median_sqdist(const std::vector<Eigen::MatrixXd>& mats) {
  Eigen::Index total = 0;
  for (const auto& m : mats) total += m.rows();
  if (total == 0) return 1.0;
  Eigen::MatrixXd pooled(total, mats[0].cols());
  Eigen::Index at = 0;
  for (const auto& m : mats) {
    pooled.middleRows(at, m.rows()) = m;
    at += m.rows();
  }
  const Eigen::MatrixXd d = kernels::pairwise_sqdist(pooled, pooled);
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j)
      if (d(i, j) > 0.0) vals.push_back(d(i, j));
  if (vals.empty()) return 1.0;
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

namespace {
// mean of all entries of the kernel matrix between a and b
ad::Var kernel_mean(ad::Tape& t, ad::Var a, ad::Var b, Kernel kernel, double bandwidth) {
  const double na = static_cast<double>(t.value(a).rows());
  const double nb = static_cast<double>(t.value(b).rows());
  if (kernel == Kernel::Linear)
    return t.scale(t.sum(t.matmul(a, b, false, true)), 1.0 / (na * nb));
  // rbf: exp(-||x-y||^2 / bandwidth)
  ad::Var cross = t.matmul(a, b, false, true);
  ad::Var sq_a = t.rowsum(t.mul(a, a));  // Na x 1
  ad::Var sq_b = t.rowsum(t.mul(b, b));  // Nb x 1
  ad::Var dist = t.add_colvec(t.add_rowvec(t.scale(cross, -2.0), t.transpose(sq_b)), sq_a);
  ad::Var k = t.exp(t.scale(dist, -1.0 / bandwidth));
  return t.scale(t.sum(k), 1.0 / (na * nb));
}
}  // namespace

ad::Var mmd_alignment_loss(ad::Tape& t, const std::vector<ad::Var>& latents, ad::Var h,
                           Kernel kernel, double bandwidth) {
  if (latents.empty()) throw std::invalid_argument("mmd_alignment_loss: no views");
  const auto& hv = t.value(h);
  if (hv.rows() == 0) throw std::invalid_argument("mmd_alignment_loss: empty input");
  for (const auto& z : latents)
    if (t.value(z).cols() != hv.cols())
      throw std::invalid_argument("mmd_alignment_loss: shape mismatch");

  if (kernel == Kernel::Rbf && bandwidth <= 0.0) {
    std::vector<Eigen::MatrixXd> pooled;
    for (const auto& z : latents) pooled.push_back(t.value(z));
    pooled.push_back(hv);
    bandwidth = median_sqdist(pooled);
  }

  ad::Var acc;
  ad::Var khh = kernel_mean(t, h, h, kernel, bandwidth);
  for (const auto& z : latents) {
    ad::Var term = t.add(t.add(kernel_mean(t, z, z, kernel, bandwidth), khh),
                         t.scale(kernel_mean(t, z, h, kernel, bandwidth), -2.0));
    acc = acc.valid() ? t.add(acc, term) : term;
  }
  return acc;
}

double mmd_alignment_loss(const std::vector<Eigen::MatrixXd>& latents, const Eigen::MatrixXd& h,
                          Kernel kernel, double bandwidth) {
  ad::Tape t;
  std::vector<ad::Var> vars;
  for (const auto& z : latents) vars.push_back(t.input(z));
  return t.scalar(mmd_alignment_loss(t, vars, t.input(h), kernel, bandwidth));
}

}  // namespace hsacc::alignment
