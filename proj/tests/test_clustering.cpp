#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "hsacc/clustering.hpp"
#include "hsacc/dataio.hpp"

using namespace hsacc;

namespace {
// brute force over all column permutations of a square cost matrix
double brute_force_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<size_t>(i)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> random_labels(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, k - 1);
  std::vector<int> out(static_cast<size_t>(n));
  for (auto& l : out) l = dist(rng);
  return out;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

// textbook ARI from the contingency table
double ari_reference(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> ra, rb;
  for (size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (auto& [k, v] : cells) index += comb2(v);
  for (auto& [k, v] : ra) sa += comb2(v);
  for (auto& [k, v] : rb) sb += comb2(v);
  const double n2 = comb2(static_cast<double>(a.size()));
  const double expected = sa * sb / n2;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

// textbook NMI with arithmetic-mean normalization
double nmi_reference(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pa, pb;
  for (size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0 / n;
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
  }
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (auto& [k, p] : joint) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  for (auto& [k, p] : pa) ha -= p * std::log(p);
  for (auto& [k, p] : pb) hb -= p * std::log(p);
  const double denom = 0.5 * (ha + hb);
  return denom <= 0.0 ? 0.0 : mi / denom;
}
}  // namespace

TEST_CASE("hungarian matches brute force") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = dist(rng);
    auto assign = clustering::hungarian(cost);
    double total = 0.0;
    std::vector<bool> used(static_cast<size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      CHECK(!used[static_cast<size_t>(assign[static_cast<size_t>(i)])]);
      used[static_cast<size_t>(assign[static_cast<size_t>(i)])] = true;
      total += cost(i, assign[static_cast<size_t>(i)]);
    }
    CHECK(total == doctest::Approx(brute_force_assignment(cost)).epsilon(1e-9));
  }
}

TEST_CASE("accuracy is permutation-invariant and exact on relabelings") {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  const std::vector<int> relabeled{2, 2, 0, 0, 1, 1};
  CHECK(clustering::clustering_accuracy(relabeled, truth) == doctest::Approx(1.0));
  const std::vector<int> one_wrong{2, 2, 0, 0, 1, 0};
  CHECK(clustering::clustering_accuracy(one_wrong, truth) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("accuracy with unequal cluster counts") {
  const std::vector<int> truth{0, 0, 1, 1};
  const std::vector<int> pred{0, 1, 2, 3};  // each point its own cluster
  CHECK(clustering::clustering_accuracy(pred, truth) == doctest::Approx(0.5));
}

TEST_CASE("metric oracles on random label pairs") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const int n = 5 + static_cast<int>(s % 30);
    const int ka = 2 + static_cast<int>(s % 4);
    const int kb = 2 + static_cast<int>((s / 4) % 4);
    const auto a = random_labels(n, ka, 2 * s);
    const auto b = random_labels(n, kb, 2 * s + 1);
    CHECK(clustering::ari(a, b) == doctest::Approx(ari_reference(a, b)).epsilon(1e-9));
    CHECK(clustering::nmi(a, b) == doctest::Approx(nmi_reference(a, b)).epsilon(1e-9));
    // symmetry
    CHECK(clustering::ari(a, b) == doctest::Approx(clustering::ari(b, a)).epsilon(1e-12));
    CHECK(clustering::nmi(a, b) == doctest::Approx(clustering::nmi(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("metric edge cases") {
  const std::vector<int> same{0, 1, 0, 1, 2};
  CHECK(clustering::ari(same, same) == doctest::Approx(1.0));
  CHECK(clustering::nmi(same, same) == doctest::Approx(1.0));

  const std::vector<int> all_one_a{0, 0, 0, 0};
  const std::vector<int> all_one_b{3, 3, 3, 3};
  CHECK(clustering::nmi(all_one_a, all_one_b) == 0.0);   // 0/0 convention
  CHECK(clustering::ari(all_one_a, all_one_b) == 1.0);   // degenerate perfect match
  CHECK(clustering::clustering_accuracy(all_one_a, all_one_b) == doctest::Approx(1.0));
}

TEST_CASE("kmeans recovers separated blobs") {
  auto ds = dataio::synth_gaussian(120, 3, {4}, 12.0, 0.3, 5);
  auto res = clustering::kmeans(ds.views[0], 3, 8, 7);
  CHECK(clustering::clustering_accuracy(res.labels, *ds.labels) == doctest::Approx(1.0));
  CHECK(res.centers.rows() == 3);
  // inertia consistent with the returned assignment
  double ssq = 0.0;
  for (int i = 0; i < 120; ++i)
    ssq += (ds.views[0].row(i) - res.centers.row(res.labels[static_cast<size_t>(i)])).squaredNorm();
  CHECK(res.inertia == doctest::Approx(ssq).epsilon(1e-9));
}

TEST_CASE("kmeans determinism and label range") {
  auto ds = dataio::synth_gaussian(60, 4, {5}, 6.0, 1.0, 3);
  auto a = clustering::kmeans(ds.views[0], 4, 5, 11);
  auto b = clustering::kmeans(ds.views[0], 4, 5, 11);
  CHECK(a.labels == b.labels);
  CHECK(a.inertia == b.inertia);
  for (int l : a.labels) {
    CHECK(l >= 0);
    CHECK(l < 4);
  }
}

TEST_CASE("kmeans extremes: k=1 and k=n") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 0, 0, 1, 5, 5;
  auto one = clustering::kmeans(x, 1, 3, 0);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  CHECK((one.centers.row(0) - mean).cwiseAbs().maxCoeff() < 1e-9);

  auto all = clustering::kmeans(x, 4, 3, 0);
  CHECK(all.inertia == doctest::Approx(0.0));
  std::vector<int> sorted = all.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3});

  CHECK_THROWS_AS(clustering::kmeans(x, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(clustering::kmeans(x, 5, 1, 0), std::invalid_argument);
}

TEST_CASE("more restarts never increase the best inertia") {
  auto ds = dataio::synth_gaussian(80, 5, {3}, 3.0, 1.5, 9);
  const double few = clustering::kmeans(ds.views[0], 5, 1, 42).inertia;
  const double many = clustering::kmeans(ds.views[0], 5, 20, 42).inertia;
  CHECK(many <= few + 1e-12);
}

TEST_CASE("cluster_and_score wires metrics through") {
  auto ds = dataio::synth_gaussian(90, 3, {6}, 10.0, 0.4, 2);
  auto rep = clustering::cluster_and_score(ds.views[0], 3, 6, 1, ds.labels);
  REQUIRE(rep.acc.has_value());
  CHECK(*rep.acc == doctest::Approx(1.0));
  CHECK(*rep.nmi == doctest::Approx(1.0));
  CHECK(*rep.ari == doctest::Approx(1.0));
  CHECK(rep.k == 3);

  auto blind = clustering::cluster_and_score(ds.views[0], 3, 6, 1, std::nullopt);
  CHECK(!blind.acc.has_value());
  CHECK(blind.predicted.size() == 90);
}
