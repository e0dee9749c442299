#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsacc::dataio {

struct MultiViewDataset {
  std::vector<Eigen::MatrixXd> views;  // each N x d_v
  std::optional<std::vector<int>> labels;
  int n = 0;
  std::vector<int> dims;

  int num_views() const { return static_cast<int>(views.size()); }
};

// N x V indicator: 1 = sample available in that view. Every row has >= 1 one.
struct AvailabilityMask {
  Eigen::MatrixXi entries;

  int n() const { return static_cast<int>(entries.rows()); }
  int v() const { return static_cast<int>(entries.cols()); }
  bool available(int i, int view) const { return entries(i, view) != 0; }
  static AvailabilityMask all_available(int n, int v);
};

// Directory layout: view_0.csv .. view_{V-1}.csv (no header), optional
// labels.csv (one integer per line). Rejects NaN/inf and ragged views.
MultiViewDataset load_dataset(const std::string& dir_path);
void save_dataset(const std::string& dir_path, const MultiViewDataset& ds);

AvailabilityMask load_mask(const std::string& path);
void save_mask(const std::string& path, const AvailabilityMask& mask);

// Exactly round(missing_rate*n) rows incomplete; each incomplete row loses a
// uniformly chosen nonempty proper subset of views (one view when v=2).
AvailabilityMask generate_mask(int n, int v, double missing_rate, std::uint64_t seed);

// Per-column min-max to [0,1]; constant columns map to 0. When a mask is
// given, ranges come from available rows only (masked rows are still scaled
// so stale values never look out of distribution, but they never enter a loss).
MultiViewDataset normalize_views(const MultiViewDataset& ds);
MultiViewDataset normalize_views(const MultiViewDataset& ds, const AvailabilityMask& mask);

// Gaussian blobs sharing labels across views; per-view centers at pairwise
// distance >= sep.
MultiViewDataset synth_gaussian(int n, int k, const std::vector<int>& dims, double sep,
                                double noise, std::uint64_t seed);

}  // namespace hsacc::dataio
