#include <doctest.h>

#include <random>

#include "hsacc/completion.hpp"

using namespace hsacc;

namespace {
Eigen::MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

network::MlpParams identity_head(int d) {
  network::MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)});
  return p;
}

network::MlpParams constant_head(int d, double c) {
  network::MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Constant(d, c)});
  return p;
}
}  // namespace

TEST_CASE("infer_cross_view is a plain forward pass") {
  const auto z = random_matrix(5, 3, 1);
  CHECK((completion::infer_cross_view(identity_head(3), z) - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inference loss worked example") {
  // two views, two samples, 1-d latents. q_{0->1} misses by 1 on one selected
  // row and hits on the other; q_{1->0} is exact. Per-pair means are 0.5 and 0,
  // total = (0.5 + 0) / (V(V-1)) = 0.25.
  std::vector<Eigen::MatrixXd> z{Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 1)};
  z[1] << 1.0, 2.0;

  completion::CompletionOutputs out;
  out.q[{0, 1}] = Eigen::MatrixXd::Zero(2, 1);
  out.q[{0, 1}] << 1.0, 1.0;  // row 0 exact, row 1 off by 1
  out.q[{1, 0}] = Eigen::MatrixXd::Zero(2, 1);

  std::map<std::pair<int, int>, std::vector<int>> rows;
  rows[{0, 1}] = {0, 1};
  rows[{1, 0}] = {0, 1};
  CHECK(completion::inference_loss(z, out, rows) == doctest::Approx(0.25).epsilon(1e-12));

  // empty selection contributes zero
  rows[{0, 1}] = {};
  CHECK(completion::inference_loss(z, out, rows) == doctest::Approx(0.0).epsilon(1e-12));

  // perfect predictions give zero loss
  completion::CompletionOutputs exact;
  exact.q[{0, 1}] = z[1];
  exact.q[{1, 0}] = z[0];
  rows[{0, 1}] = {0, 1};
  CHECK(completion::inference_loss(z, exact, rows) == doctest::Approx(0.0));
}

TEST_CASE("mask-driven inference loss selects complete rows per pair") {
  std::vector<Eigen::MatrixXd> z{Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 1)};
  completion::CompletionOutputs out;
  Eigen::MatrixXd q(3, 1);
  q << 2.0, 2.0, 2.0;  // squared error 4 on every row
  out.q[{0, 1}] = q;
  out.q[{1, 0}] = Eigen::MatrixXd::Zero(3, 1);

  dataio::AvailabilityMask mask = dataio::AvailabilityMask::all_available(3, 2);
  // all rows complete: pair (0,1) mean err 4, pair (1,0) mean 0 -> 4/2 = 2
  CHECK(completion::inference_loss(z, out, mask) == doctest::Approx(2.0).epsilon(1e-12));

  mask.entries(0, 1) = 0;  // row 0 incomplete: same means, still 2
  CHECK(completion::inference_loss(z, out, mask) == doctest::Approx(2.0).epsilon(1e-12));

  mask.entries(1, 1) = 0;
  mask.entries(2, 1) = 0;  // no complete rows left -> both pairs empty
  CHECK(completion::inference_loss(z, out, mask) == doctest::Approx(0.0));
}

TEST_CASE("complete_latents fills only unavailable rows") {
  const int d = 3;
  std::vector<Eigen::MatrixXd> z{random_matrix(4, d, 10), random_matrix(4, d, 11)};
  std::map<std::pair<int, int>, network::MlpParams> heads;
  heads[{0, 1}] = constant_head(d, 7.0);
  heads[{1, 0}] = constant_head(d, -3.0);

  dataio::AvailabilityMask mask = dataio::AvailabilityMask::all_available(4, 2);
  mask.entries(1, 1) = 0;  // sample 1 misses view 1
  mask.entries(3, 0) = 0;  // sample 3 misses view 0

  auto filled = completion::complete_latents(z, heads, mask);
  // untouched rows are bit-identical
  for (int i : {0, 2}) {
    CHECK((filled[0].row(i) - z[0].row(i)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((filled[1].row(i) - z[1].row(i)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((filled[1].row(1).array() - 7.0).abs().maxCoeff() < 1e-12);
  CHECK((filled[0].row(3).array() + 3.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("complete_latents averages over available sources") {
  const int d = 2;
  std::vector<Eigen::MatrixXd> z{random_matrix(2, d, 20), random_matrix(2, d, 21),
                                 random_matrix(2, d, 22)};
  std::map<std::pair<int, int>, network::MlpParams> heads;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) heads[{a, b}] = constant_head(d, a == 0 ? 1.0 : 5.0);

  dataio::AvailabilityMask mask = dataio::AvailabilityMask::all_available(2, 3);
  mask.entries(0, 2) = 0;  // sources 0 and 1 predict 1.0 and 5.0 -> mean 3.0
  auto filled = completion::complete_latents(z, heads, mask);
  CHECK((filled[2].row(0).array() - 3.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("complete_latents from precomputed outputs matches head evaluation") {
  const int d = 3;
  std::vector<Eigen::MatrixXd> z{random_matrix(5, d, 30), random_matrix(5, d, 31)};
  std::map<std::pair<int, int>, network::MlpParams> heads;
  heads[{0, 1}] = network::init_mlp({d, 4, d}, 1);
  heads[{1, 0}] = network::init_mlp({d, 4, d}, 2);

  dataio::AvailabilityMask mask = dataio::AvailabilityMask::all_available(5, 2);
  mask.entries(2, 0) = 0;
  mask.entries(4, 1) = 0;

  completion::CompletionOutputs out;
  out.q[{0, 1}] = completion::infer_cross_view(heads[{0, 1}], z[0]);
  out.q[{1, 0}] = completion::infer_cross_view(heads[{1, 0}], z[1]);

  auto a = completion::complete_latents(z, heads, mask);
  auto b = completion::complete_latents(z, out, mask);
  for (int v = 0; v < 2; ++v)
    CHECK((a[static_cast<size_t>(v)] - b[static_cast<size_t>(v)]).cwiseAbs().maxCoeff() == 0.0);
}
