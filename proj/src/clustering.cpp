#include "hsacc/clustering.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "hsacc/kernels.hpp"

namespace hsacc::clustering {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd centers(k, x.cols());
  std::uniform_int_distribution<int> first(0, n - 1);
  centers.row(0) = x.row(first(rng));
  Eigen::VectorXd d2(n);
  for (int i = 0; i < n; ++i) d2(i) = (x.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng), cum = 0.0;
      for (int i = 0; i < n; ++i) {
        cum += d2(i);
        if (cum >= target) { pick = i; break; }
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = x.row(pick);
    for (int i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (x.row(i) - centers.row(c)).squaredNorm());
  }
  return centers;
}

KmeansResult kmeans_single(const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centers = kmeanspp_seed(x, k, rng);
  std::vector<int> labels;
  for (int iter = 0; iter < 300; ++iter) {
    kernels::kmeans_assign(x, centers, labels);
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (int i = 0; i < n; ++i) {
      next.row(labels[static_cast<size_t>(i)]) += x.row(i);
      counts(labels[static_cast<size_t>(i)])++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0) {
        next.row(c) /= counts(c);
      } else {
        // re-seed to the point farthest from its assigned center
        double best = -1.0;
        int pick = 0;
        for (int i = 0; i < n; ++i) {
          const double d = (x.row(i) - centers.row(labels[static_cast<size_t>(i)])).squaredNorm();
          if (d > best) { best = d; pick = i; }
        }
        next.row(c) = x.row(pick);
      }
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) shift = std::max(shift, (next.row(c) - centers.row(c)).norm());
    centers = next;
    if (shift < 1e-4) break;
  }
  KmeansResult res;
  res.inertia = kernels::kmeans_assign(x, centers, res.labels);
  res.centers = std::move(centers);
  return res;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& x, int k, int restarts, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (x.rows() < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (restarts < 1) restarts = 1;
  std::vector<KmeansResult> results(static_cast<size_t>(restarts));
#pragma omp parallel for schedule(static)
  for (int r = 0; r < restarts; ++r)
    results[static_cast<size_t>(r)] = kmeans_single(x, k, splitmix64(seed + static_cast<std::uint64_t>(r)));
  size_t best = 0;
  for (size_t r = 1; r < results.size(); ++r)
    if (results[r].inertia < results[best].inertia) best = r;
  return results[best];
}

namespace {
// contingency counts keyed by (pred, truth), plus remapped dense ids
struct Contingency {
  Eigen::MatrixXd counts;  // kp x kt
  int n = 0;
};

Contingency contingency(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("metrics: label length mismatch");
  std::map<int, int> pid, tid;
  for (int p : pred) pid.emplace(p, 0);
  for (int t : truth) tid.emplace(t, 0);
  int next = 0;
  for (auto& [k, v] : pid) v = next++;
  next = 0;
  for (auto& [k, v] : tid) v = next++;
  Contingency c;
  c.n = static_cast<int>(pred.size());
  c.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pid.size()),
                                   static_cast<Eigen::Index>(tid.size()));
  for (size_t i = 0; i < pred.size(); ++i)
    c.counts(pid[pred[i]], tid[truth[i]]) += 1.0;
  return c;
}
}  // namespace

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("hungarian: matrix must be square");
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = p[static_cast<size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assign(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<size_t>(j)]) assign[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
  return assign;
}

double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency(pred, truth);
  const int s = static_cast<int>(std::max(c.counts.rows(), c.counts.cols()));
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(s, s);
  cost.topLeftCorner(c.counts.rows(), c.counts.cols()) = -c.counts;
  const auto assign = hungarian(cost);
  double matched = 0.0;
  for (Eigen::Index i = 0; i < c.counts.rows(); ++i) {
    const int j = assign[static_cast<size_t>(i)];
    if (j < c.counts.cols()) matched += c.counts(i, j);
  }
  return matched / c.n;
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency(pred, truth);
  const double n = c.n;
  const Eigen::VectorXd rp = c.counts.rowwise().sum();
  const Eigen::VectorXd ct = c.counts.colwise().sum();
  double mi = 0.0, hp = 0.0, ht = 0.0;
  for (Eigen::Index i = 0; i < rp.size(); ++i)
    if (rp(i) > 0) hp -= (rp(i) / n) * std::log(rp(i) / n);
  for (Eigen::Index j = 0; j < ct.size(); ++j)
    if (ct(j) > 0) ht -= (ct(j) / n) * std::log(ct(j) / n);
  for (Eigen::Index i = 0; i < c.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < c.counts.cols(); ++j)
      if (c.counts(i, j) > 0)
        mi += (c.counts(i, j) / n) * std::log(c.counts(i, j) * n / (rp(i) * ct(j)));
  const double denom = 0.5 * (hp + ht);
  if (denom <= 0.0) return 0.0;
  return mi / denom;
}

double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() < 2) throw std::invalid_argument("ari: need at least 2 samples");
  const Contingency c = contingency(pred, truth);
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (Eigen::Index i = 0; i < c.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < c.counts.cols(); ++j) index += comb2(c.counts(i, j));
  double a = 0.0, b = 0.0;
  const Eigen::VectorXd rp = c.counts.rowwise().sum();
  const Eigen::VectorXd ct = c.counts.colwise().sum();
  for (Eigen::Index i = 0; i < rp.size(); ++i) a += comb2(rp(i));
  for (Eigen::Index j = 0; j < ct.size(); ++j) b += comb2(ct(j));
  const double expected = a * b / comb2(static_cast<double>(c.n));
  const double max_index = 0.5 * (a + b);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

ClusteringReport cluster_and_score(const Eigen::MatrixXd& features, int k, int restarts,
                                   std::uint64_t seed,
                                   const std::optional<std::vector<int>>& truth) {
  auto km = kmeans(features, k, restarts, seed);
  ClusteringReport rep;
  rep.predicted = km.labels;
  rep.k = k;
  rep.inertia = km.inertia;
  if (truth) {
    rep.acc = clustering_accuracy(km.labels, *truth);
    rep.nmi = nmi(km.labels, *truth);
    rep.ari = ari(km.labels, *truth);
  }
  return rep;
}

}  // namespace hsacc::clustering
