#include "hsacc/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace hsacc::network {

MlpParams init_mlp(const std::vector<int>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw std::invalid_argument("init_mlp: need at least 2 dims");
  for (int d : layer_dims)
    if (d <= 0) throw std::invalid_argument("init_mlp: dims must be positive");

  std::mt19937_64 rng(seed);
  MlpParams p;
  for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int in = layer_dims[l], out = layer_dims[l + 1];
    const double bound = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    MlpParams::Layer layer;
    layer.w.resize(in, out);
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) layer.w(i, j) = dist(rng);
    layer.b = Eigen::VectorXd::Zero(out);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& batch) {
  if (batch.cols() != params.layers.front().w.rows())
    throw std::invalid_argument("forward: input dim mismatch");
  Eigen::MatrixXd h = batch;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    h = (h * params.layers[l].w).rowwise() + params.layers[l].b.transpose();
    if (l + 1 < params.layers.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

MlpVars register_params(ad::Tape& tape, const MlpParams& params) {
  MlpVars v;
  v.activation = params.activation;
  for (const auto& layer : params.layers) {
    MlpVars::Layer lv;
    lv.w = tape.input(layer.w);
    lv.b = tape.input(layer.b.transpose());  // stored as 1 x out on the tape
    v.layers.push_back(lv);
  }
  return v;
}

ad::Var forward(ad::Tape& tape, const MlpVars& vars, ad::Var batch) {
  ad::Var h = batch;
  for (size_t l = 0; l < vars.layers.size(); ++l) {
    h = tape.add_rowvec(tape.matmul(h, vars.layers[l].w), vars.layers[l].b);
    if (l + 1 < vars.layers.size()) h = tape.relu(h);
  }
  return h;
}

MlpGrads collect_grads(const ad::Tape& tape, const MlpVars& vars) {
  MlpGrads g;
  for (const auto& lv : vars.layers) {
    MlpParams::Layer layer;
    layer.w = tape.grad(lv.w);
    layer.b = tape.grad(lv.b).transpose();
    g.layers.push_back(std::move(layer));
  }
  return g;
}

OptimizerState init_optimizer(const MlpParams& params) {
  OptimizerState s;
  for (const auto& layer : params.layers) {
    MlpParams::Layer zero;
    zero.w = Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols());
    zero.b = Eigen::VectorXd::Zero(layer.b.size());
    s.m.push_back(zero);
    s.v.push_back(zero);
  }
  return s;
}

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

void adam_update(Eigen::MatrixXd& theta, const Eigen::MatrixXd& g, Eigen::MatrixXd& m,
                 Eigen::MatrixXd& v, double lr, long t) {
  m = kBeta1 * m + (1.0 - kBeta1) * g;
  v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
  theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
}
}  // namespace

void adam_step(MlpParams& params, const MlpGrads& grads, OptimizerState& state, double lr) {
  if (grads.layers.size() != params.layers.size())
    throw std::invalid_argument("adam_step: layer count mismatch");
  ++state.step;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    if (g.w.rows() != p.w.rows() || g.w.cols() != p.w.cols() || g.b.size() != p.b.size())
      throw std::invalid_argument("adam_step: shape mismatch");
    adam_update(p.w, g.w, state.m[l].w, state.v[l].w, lr, state.step);
    Eigen::MatrixXd bm = state.m[l].b, bv = state.v[l].b, bt = p.b, bg = g.b;
    adam_update(bt, bg, bm, bv, lr, state.step);
    p.b = bt;
    state.m[l].b = bm;
    state.v[l].b = bv;
  }
}

namespace {
constexpr char kMagic[8] = {'H', 'S', 'A', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedMlp>& nets) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(nets.size()));
  for (const auto& net : nets) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.name.size()));
    os.write(net.name.data(), static_cast<std::streamsize>(net.name.size()));
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(net.params.activation));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.params.layers.size()));
    for (const auto& layer : net.params.layers) {
      write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layer.w.rows()));
      write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layer.w.cols()));
      for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
        for (Eigen::Index j = 0; j < layer.w.cols(); ++j) write_pod<double>(os, layer.w(i, j));
      for (Eigen::Index j = 0; j < layer.b.size(); ++j) write_pod<double>(os, layer.b(j));
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::vector<NamedMlp> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto count = read_pod<std::uint32_t>(is);
  std::vector<NamedMlp> nets;
  for (std::uint32_t n = 0; n < count; ++n) {
    NamedMlp net;
    const auto name_len = read_pod<std::uint32_t>(is);
    net.name.resize(name_len);
    is.read(net.name.data(), name_len);
    net.params.activation = static_cast<Activation>(read_pod<std::uint8_t>(is));
    const auto n_layers = read_pod<std::uint32_t>(is);
    for (std::uint32_t l = 0; l < n_layers; ++l) {
      const auto rows = read_pod<std::uint32_t>(is);
      const auto cols = read_pod<std::uint32_t>(is);
      MlpParams::Layer layer;
      layer.w.resize(rows, cols);
      for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j) layer.w(i, j) = read_pod<double>(is);
      layer.b.resize(cols);
      for (std::uint32_t j = 0; j < cols; ++j) layer.b(j) = read_pod<double>(is);
      net.params.layers.push_back(std::move(layer));
    }
    nets.push_back(std::move(net));
  }
  return nets;
}

}  // namespace hsacc::network
