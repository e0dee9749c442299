#pragma once

#include <Eigen/Dense>

// Hot inner loops, each in two variants: a plain serial reference and an
// OpenMP version parallelized over independent output rows. Both compute
// every output coefficient with the same instruction order, so results are
// bitwise identical regardless of thread count.

namespace hsacc::kernels {

enum class Mode { Serial, Parallel };

// Process-wide default used by the dispatching overloads below.
void set_mode(Mode m);
Mode mode();

// C = op(A) * op(B), op selected by the trans flags. transA && transB is
// not supported (never needed here).
Eigen::MatrixXd matmul_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              bool trans_a = false, bool trans_b = false);
Eigen::MatrixXd matmul_omp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           bool trans_a = false, bool trans_b = false);
Eigen::MatrixXd matmul(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       bool trans_a = false, bool trans_b = false);

// D(i,j) = ||a_i - b_j||^2, clamped at 0.
Eigen::MatrixXd pairwise_sqdist_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd pairwise_sqdist_omp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Nearest-center assignment for one Lloyd iteration. Returns labels and the
// summed squared distance (inertia).
double kmeans_assign_serial(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                            std::vector<int>& labels);
double kmeans_assign_omp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                         std::vector<int>& labels);
double kmeans_assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                     std::vector<int>& labels);

}  // namespace hsacc::kernels
