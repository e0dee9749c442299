#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hsacc/autodiff.hpp"

namespace hsacc::alignment {

enum class Kernel { Linear, Rbf };

struct JointDistribution {
  Eigen::MatrixXd p;               // D x D, clamped and normalized to sum 1
  Eigen::VectorXd row_marginal;    // length D
  Eigen::VectorXd col_marginal;    // length D
};

struct ViewWeights {
  Eigen::VectorXd w;               // softmax of -discrepancies, sums to 1
  Eigen::VectorXd discrepancies;
};

struct LatentBundle {
  std::vector<Eigen::MatrixXd> z;  // V matrices, N x D
  Eigen::MatrixXd r;               // elementwise mean of z
  Eigen::MatrixXd h;               // sum_v w_v * z_v
  ViewWeights weights;
};

constexpr double kProbFloor = 1e-10;

// Negative mutual information of the symmetrized joint built from row-wise
// softmaxed latents. Value lies in [-ln D, 0].
ad::Var mutual_information_loss(ad::Tape& tape, ad::Var z1, ad::Var z2);
double mutual_information_loss(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2);

// Value-path joint distribution, exposed for inspection/tests.
JointDistribution joint_distribution(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2);

// Mean of mutual_information_loss over all unordered view pairs.
ad::Var pairwise_mi_loss(ad::Tape& tape, const std::vector<ad::Var>& latents);
double pairwise_mi_loss(const std::vector<Eigen::MatrixXd>& latents);

// Linear-kernel MMD^2 between the two sample sets: ||mean(z) - mean(r)||^2
// written as the three double sums.
double view_discrepancy(const Eigen::MatrixXd& z, const Eigen::MatrixXd& r);

// w_v = exp(-D_v) / sum_u exp(-D_u), max-subtracted. Treated as constants in
// backpropagation.
ViewWeights view_weights(const Eigen::VectorXd& discrepancies);

// r = mean of latents, weights from view_discrepancy(z_v, r), h = sum w_v z_v.
LatentBundle fuse(const std::vector<Eigen::MatrixXd>& latents);
LatentBundle fuse(const std::vector<Eigen::MatrixXd>& latents, const ViewWeights& weights);

// Median of positive pairwise squared distances over the pooled rows of all
// inputs; 1.0 when everything coincides.
double median_sqdist(const std::vector<Eigen::MatrixXd>& mats);

// sum_v [ mean(K_zz) + mean(K_hh) - 2 mean(K_zh) ]. For Kernel::Rbf,
// k(x,y) = exp(-||x-y||^2 / bandwidth); bandwidth <= 0 selects the median
// heuristic (held constant for gradients).
ad::Var mmd_alignment_loss(ad::Tape& tape, const std::vector<ad::Var>& latents, ad::Var h,
                           Kernel kernel, double bandwidth = -1.0);
double mmd_alignment_loss(const std::vector<Eigen::MatrixXd>& latents, const Eigen::MatrixXd& h,
                          Kernel kernel, double bandwidth = -1.0);

}  // namespace hsacc::alignment
