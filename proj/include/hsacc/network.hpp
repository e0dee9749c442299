#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hsacc/autodiff.hpp"

namespace hsacc::network {

enum class Activation { Relu };

// Fully connected network: hidden layers use `activation`, output is linear.
struct MlpParams {
  struct Layer {
    Eigen::MatrixXd w;  // in_dim x out_dim
    Eigen::VectorXd b;  // out_dim
  };
  std::vector<Layer> layers;
  Activation activation = Activation::Relu;

  int in_dim() const { return static_cast<int>(layers.front().w.rows()); }
  int out_dim() const { return static_cast<int>(layers.back().w.cols()); }
};

// Uniform(-sqrt(6/fan_in), sqrt(6/fan_in)) weights, zero biases.
MlpParams init_mlp(const std::vector<int>& layer_dims, std::uint64_t seed);

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& batch);

// Tape-registered parameters of one network, for gradient extraction.
struct MlpVars {
  struct Layer {
    ad::Var w;
    ad::Var b;
  };
  std::vector<Layer> layers;
  Activation activation = Activation::Relu;
};

MlpVars register_params(ad::Tape& tape, const MlpParams& params);
ad::Var forward(ad::Tape& tape, const MlpVars& vars, ad::Var batch);

// Gradients of one network after Tape::backward, in layer order (w then b).
struct MlpGrads {
  std::vector<MlpParams::Layer> layers;
};
MlpGrads collect_grads(const ad::Tape& tape, const MlpVars& vars);

struct OptimizerState {
  std::vector<MlpParams::Layer> m;  // first moments
  std::vector<MlpParams::Layer> v;  // second moments
  long step = 0;
};

OptimizerState init_optimizer(const MlpParams& params);

// One Adam update in place; beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected.
void adam_step(MlpParams& params, const MlpGrads& grads, OptimizerState& state, double lr);

// Checkpoint container: every network of a model, keyed by name.
struct NamedMlp {
  std::string name;
  MlpParams params;
};

void save_checkpoint(const std::string& path, const std::vector<NamedMlp>& nets);
std::vector<NamedMlp> load_checkpoint(const std::string& path);

}  // namespace hsacc::network
