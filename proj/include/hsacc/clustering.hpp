#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace hsacc::clustering {

struct KmeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  double inertia = 0.0;
};

// Lloyd with k-means++ seeding, max 300 iterations, stop when the largest
// center shift drops below 1e-4. Best of `restarts` by inertia (ties go to
// the lowest restart index). Empty clusters are re-seeded to the point
// farthest from its current center.
KmeansResult kmeans(const Eigen::MatrixXd& x, int k, int restarts, std::uint64_t seed);

// Hungarian-matched fraction of agreeing samples.
double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Normalized by the arithmetic mean of label entropies; 0/0 -> 0.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

double ari(const std::vector<int>& pred, const std::vector<int>& truth);

// Min-cost assignment on a square cost matrix; returns col index per row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

struct ClusteringReport {
  std::vector<int> predicted;
  std::optional<double> acc, nmi, ari;
  int k = 0;
  double inertia = 0.0;
};

ClusteringReport cluster_and_score(const Eigen::MatrixXd& features, int k, int restarts,
                                   std::uint64_t seed,
                                   const std::optional<std::vector<int>>& truth);

}  // namespace hsacc::clustering
