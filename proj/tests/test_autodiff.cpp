#include <doctest.h>

#include <random>

#include "grad_check.hpp"
#include "hsacc/autodiff.hpp"

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
}  // namespace

TEST_CASE("basic values") {
  ad::Tape t;
  const auto va = random_matrix(3, 4, 1);
  const auto vb = random_matrix(4, 2, 2);
  auto a = t.input(va);
  auto b = t.input(vb);
  auto prod = t.matmul(a, b);  // value() references die on the next tape op
  CHECK((t.value(prod) - va * vb).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(t.scalar(t.sum(a)) == doctest::Approx(t.value(a).sum()));
  CHECK(t.scalar(t.squared_norm(a)) == doctest::Approx(t.value(a).squaredNorm()));
}

TEST_CASE("softmax rows sum to one") {
  ad::Tape t;
  auto s = t.softmax_rows(t.input(random_matrix(5, 7, 3)));
  for (int i = 0; i < 5; ++i) CHECK(t.value(s).row(i).sum() == doctest::Approx(1.0));
}

TEST_CASE("quadratic gradient is 2w") {
  ad::Tape t;
  auto w = t.input(random_matrix(3, 3, 4));
  t.backward(t.squared_norm(w));
  CHECK((t.grad(w) - 2.0 * t.value(w)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("disconnected leaf has zero gradient") {
  ad::Tape t;
  auto w = t.input(random_matrix(2, 2, 5));
  auto unused = t.input(random_matrix(2, 2, 6));
  t.backward(t.sum(w));
  CHECK(t.grad(unused).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradients accumulate when a node is reused") {
  ad::Tape t;
  auto w = t.input(random_matrix(2, 3, 7));
  t.backward(t.sum(t.add(w, w)));
  CHECK((t.grad(w).array() - 2.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("finite differences across op mix") {
  std::vector<Eigen::MatrixXd> leaves{random_matrix(4, 3, 8), random_matrix(3, 4, 9)};
  auto rep = testing::fd_check(leaves, [](ad::Tape& t, const std::vector<ad::Var>& v) {
    auto prod = t.matmul(v[0], v[1]);
    auto act = t.relu(prod);
    auto soft = t.softmax_rows(t.mul(act, act));
    auto logs = t.log(t.clamp_min(soft, 1e-10));
    auto e = t.exp(t.scale(t.transpose(v[1]), 0.1));
    return t.add(t.sum(t.mul(soft, logs)), t.squared_norm(t.sub(e, v[0])));
  });
  CHECK(rep.max_rel < 1e-5);
}

TEST_CASE("select_rows, broadcast adds, div") {
  std::vector<Eigen::MatrixXd> leaves{random_matrix(5, 3, 10), random_matrix(1, 3, 11),
                                      random_matrix(5, 1, 12)};
  auto rep = testing::fd_check(leaves, [](ad::Tape& t, const std::vector<ad::Var>& v) {
    auto sel = t.select_rows(v[0], {0, 2, 2, 4});
    auto brow = t.add_rowvec(v[0], v[1]);
    auto bcol = t.add_colvec(brow, v[2]);
    auto q = t.div(bcol, t.clamp_min(t.exp(v[0]), 1e-3));
    auto scl = t.div_by_scalar(sel, t.clamp_min(t.sum(t.mul(v[1], v[1])), 1e-6));
    return t.add(t.sum(q), t.squared_norm(scl));
  });
  CHECK(rep.max_rel < 1e-5);
}
