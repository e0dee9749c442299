#include "hsacc/kernels.hpp"

#include <atomic>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hsacc::kernels {

namespace {
std::atomic<Mode> g_mode{Mode::Parallel};

void check_matmul_dims(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       bool trans_a, bool trans_b) {
  if (trans_a && trans_b) throw std::invalid_argument("matmul: transA && transB unsupported");
  const auto inner_a = trans_a ? a.rows() : a.cols();
  const auto inner_b = trans_b ? b.cols() : b.rows();
  if (inner_a != inner_b) throw std::invalid_argument("matmul: inner dimension mismatch");
}
}  // namespace

void set_mode(Mode m) { g_mode.store(m); }
Mode mode() { return g_mode.load(); }

#define HSACC_MATMUL_BODY(PRAGMA)                                              \
  check_matmul_dims(a, b, trans_a, trans_b);                                   \
  const Eigen::Index rows = trans_a ? a.cols() : a.rows();                     \
  const Eigen::Index cols = trans_b ? b.rows() : b.cols();                     \
  Eigen::MatrixXd c(rows, cols);                                               \
  if (!trans_a && !trans_b) {                                                  \
    PRAGMA                                                                     \
    for (Eigen::Index i = 0; i < rows; ++i) c.row(i) = a.row(i) * b;           \
  } else if (trans_a) {                                                        \
    PRAGMA                                                                     \
    for (Eigen::Index i = 0; i < rows; ++i) c.row(i) = a.col(i).transpose() * b; \
  } else {                                                                     \
    PRAGMA                                                                     \
    for (Eigen::Index i = 0; i < rows; ++i) c.row(i) = a.row(i) * b.transpose(); \
  }                                                                            \
  return c;

Eigen::MatrixXd matmul_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              bool trans_a, bool trans_b) {
  HSACC_MATMUL_BODY()
}

Eigen::MatrixXd matmul_omp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           bool trans_a, bool trans_b) {
  HSACC_MATMUL_BODY(_Pragma("omp parallel for schedule(static)"))
}

Eigen::MatrixXd matmul(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       bool trans_a, bool trans_b) {
  return mode() == Mode::Parallel ? matmul_omp(a, b, trans_a, trans_b)
                                  : matmul_serial(a, b, trans_a, trans_b);
}

#undef HSACC_MATMUL_BODY

#define HSACC_SQDIST_BODY(PRAGMA)                                              \
  if (a.cols() != b.cols()) throw std::invalid_argument("pairwise_sqdist: dim mismatch"); \
  Eigen::MatrixXd d(a.rows(), b.rows());                                       \
  PRAGMA                                                                       \
  for (Eigen::Index i = 0; i < a.rows(); ++i)                                  \
    for (Eigen::Index j = 0; j < b.rows(); ++j)                                \
      d(i, j) = std::max(0.0, (a.row(i) - b.row(j)).squaredNorm());            \
  return d;

Eigen::MatrixXd pairwise_sqdist_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  HSACC_SQDIST_BODY()
}

Eigen::MatrixXd pairwise_sqdist_omp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  HSACC_SQDIST_BODY(_Pragma("omp parallel for schedule(static)"))
}

Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return mode() == Mode::Parallel ? pairwise_sqdist_omp(a, b) : pairwise_sqdist_serial(a, b);
}

#undef HSACC_SQDIST_BODY

#define HSACC_ASSIGN_BODY(PRAGMA)                                              \
  labels.assign(static_cast<size_t>(x.rows()), 0);                             \
  std::vector<double> best(static_cast<size_t>(x.rows()), 0.0);                \
  PRAGMA                                                                       \
  for (Eigen::Index i = 0; i < x.rows(); ++i) {                                \
    double bd = std::numeric_limits<double>::infinity();                       \
    int bj = 0;                                                                \
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {                        \
      const double d = (x.row(i) - centers.row(j)).squaredNorm();              \
      if (d < bd) { bd = d; bj = static_cast<int>(j); }                        \
    }                                                                          \
    labels[static_cast<size_t>(i)] = bj;                                       \
    best[static_cast<size_t>(i)] = bd;                                         \
  }                                                                            \
  double inertia = 0.0;                                                        \
  for (double d : best) inertia += d;                                          \
  return inertia;

double kmeans_assign_serial(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                            std::vector<int>& labels) {
  HSACC_ASSIGN_BODY()
}

double kmeans_assign_omp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                         std::vector<int>& labels) {
  HSACC_ASSIGN_BODY(_Pragma("omp parallel for schedule(static)"))
}

double kmeans_assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                     std::vector<int>& labels) {
  return mode() == Mode::Parallel ? kmeans_assign_omp(x, centers, labels)
                                  : kmeans_assign_serial(x, centers, labels);
}

#undef HSACC_ASSIGN_BODY

}  // namespace hsacc::kernels
