#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "grad_check.hpp"
#include "hsacc/network.hpp"

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

// layer-by-layer scalar evaluation, independent of the library forward path
Eigen::MatrixXd naive_forward(const network::MlpParams& p, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = x;
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    Eigen::MatrixXd next(h.rows(), layer.w.cols());
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.w.cols(); ++j) {
        double acc = layer.b(j);
        for (Eigen::Index k = 0; k < h.cols(); ++k) acc += h(i, k) * layer.w(k, j);
        next(i, j) = (l + 1 < p.layers.size() && acc < 0.0) ? 0.0 : acc;
      }
    h = next;
  }
  return h;
}
}  // namespace

namespace {
template <typename A, typename B>
bool bitwise_equal(const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}
}  // namespace


TEST_CASE("init_mlp shapes and bounds") {
  auto p = network::init_mlp({4, 8, 2}, 1);
  REQUIRE(p.layers.size() == 2);
  CHECK(p.layers[0].w.rows() == 4);
  CHECK(p.layers[0].w.cols() == 8);
  CHECK(p.layers[1].w.rows() == 8);
  CHECK(p.layers[1].w.cols() == 2);
  CHECK(p.layers[0].b.size() == 8);
  CHECK(p.layers[1].b.size() == 2);
  CHECK(p.layers[0].b.cwiseAbs().maxCoeff() == 0.0);

  auto q = network::init_mlp({4, 8}, 7);
  CHECK(q.layers[0].w.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 4.0));

  CHECK_THROWS_AS(network::init_mlp({5}, 0), std::invalid_argument);
  CHECK_THROWS_AS(network::init_mlp({5, 0}, 0), std::invalid_argument);
}

TEST_CASE("init_mlp determinism") {
  auto a = network::init_mlp({6, 5, 4}, 42);
  auto b = network::init_mlp({6, 5, 4}, 42);
  auto c = network::init_mlp({6, 5, 4}, 43);
  CHECK(bitwise_equal(a.layers[0].w, b.layers[0].w));
  CHECK(bitwise_equal(a.layers[1].w, b.layers[1].w));
  CHECK(!bitwise_equal(a.layers[0].w, c.layers[0].w));
}

TEST_CASE("forward identity and zero maps") {
  network::MlpParams ident;
  ident.layers.push_back({Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)});
  const auto x = random_matrix(5, 3, 1);
  CHECK(bitwise_equal(network::forward(ident, x), x));

  network::MlpParams zero;
  zero.layers.push_back({Eigen::MatrixXd::Zero(3, 4), Eigen::VectorXd::Zero(4)});
  zero.layers.push_back({Eigen::MatrixXd::Zero(4, 2), Eigen::VectorXd::Zero(2)});
  CHECK(network::forward(zero, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward matches naive per-element evaluation") {
  auto p = network::init_mlp({5, 7, 6, 3}, 99);
  const auto x = random_matrix(9, 5, 2);
  CHECK((network::forward(p, x) - naive_forward(p, x)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(network::forward(p, random_matrix(9, 4, 3)), std::invalid_argument);
}

TEST_CASE("forward is batch-order-equivariant") {
  auto p = network::init_mlp({4, 6, 4}, 5);
  const auto x = random_matrix(6, 4, 6);
  Eigen::MatrixXd perm(6, 4);
  const std::vector<int> order{3, 1, 5, 0, 4, 2};
  for (int i = 0; i < 6; ++i) perm.row(i) = x.row(order[static_cast<size_t>(i)]);
  const auto y = network::forward(p, x);
  const auto yp = network::forward(p, perm);
  for (int i = 0; i < 6; ++i) CHECK(bitwise_equal(yp.row(i), y.row(order[static_cast<size_t>(i)])));
}

TEST_CASE("tape forward equals plain forward and passes fd check") {
  auto p = network::init_mlp({4, 5, 3}, 11);
  const auto x = random_matrix(7, 4, 12);
  ad::Tape t;
  auto vars = network::register_params(t, p);
  auto y = network::forward(t, vars, t.input(x));
  CHECK((t.value(y) - network::forward(p, x)).cwiseAbs().maxCoeff() < 1e-12);

  // fd over all parameters of a small net with an mse-style loss
  std::vector<Eigen::MatrixXd> leaves;
  for (const auto& layer : p.layers) {
    leaves.push_back(layer.w);
    leaves.push_back(layer.b.transpose());
  }
  auto rep = testing::fd_check(leaves, [&](ad::Tape& tt, const std::vector<ad::Var>& v) {
    network::MlpVars mv;
    for (size_t l = 0; l < p.layers.size(); ++l) mv.layers.push_back({v[2 * l], v[2 * l + 1]});
    auto out = network::forward(tt, mv, tt.input(x));
    return tt.scale(tt.squared_norm(out), 1.0 / x.rows());
  });
  CHECK(rep.ok());
}

TEST_CASE("adam first step approximates -lr*sign(g)") {
  network::MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)});
  auto state = network::init_optimizer(p);
  network::MlpGrads g;
  g.layers.push_back({Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1)});
  network::adam_step(p, g, state, 0.001);
  CHECK(p.layers[0].w(0, 0) == doctest::Approx(-0.001).epsilon(1e-3));
  CHECK(std::abs(p.layers[0].w(0, 0) + 0.001) < 1e-6);
  CHECK(p.layers[0].b(0) == 0.0);  // zero gradient leaves the bias unchanged
}

TEST_CASE("adam two steps match the scalar recurrence") {
  const double lr = 0.01, g = 0.5, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double theta = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    theta -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
  }

  network::MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)});
  auto state = network::init_optimizer(p);
  network::MlpGrads gr;
  gr.layers.push_back({Eigen::MatrixXd::Constant(1, 1, g), Eigen::VectorXd::Zero(1)});
  network::adam_step(p, gr, state, lr);
  network::adam_step(p, gr, state, lr);
  CHECK(p.layers[0].w(0, 0) == doctest::Approx(theta).epsilon(1e-12));
}

TEST_CASE("checkpoint round-trips bit-identically") {
  const auto dir = std::filesystem::temp_directory_path() / "hsacc_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.bin").string();

  std::vector<network::NamedMlp> nets;
  nets.push_back({"encoder_0", network::init_mlp({5, 8, 3}, 1)});
  nets.push_back({"head_0_1", network::init_mlp({3, 4, 3}, 2)});
  network::save_checkpoint(path, nets);
  auto loaded = network::load_checkpoint(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].name == "encoder_0");
  CHECK(bitwise_equal(loaded[0].params.layers[0].w, nets[0].params.layers[0].w));
  CHECK(bitwise_equal(loaded[1].params.layers[1].b, nets[1].params.layers[1].b));

  // write -> read -> write produces identical bytes
  const std::string path2 = (dir / "model2.bin").string();
  network::save_checkpoint(path2, loaded);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::filesystem::remove_all(dir);
}
