#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "hsacc/autodiff.hpp"
#include "hsacc/dataio.hpp"
#include "hsacc/network.hpp"

namespace hsacc::completion {

// Inferred latents per ordered view pair (source -> target). Rows are
// meaningful only where the source view is available.
struct CompletionOutputs {
  std::map<std::pair<int, int>, Eigen::MatrixXd> q;
};

Eigen::MatrixXd infer_cross_view(const network::MlpParams& head, const Eigen::MatrixXd& z_source);

// Mean squared inference error over ordered pairs, each pair averaged over
// its selected samples, the whole divided by V(V-1). Pairs with an empty
// selection contribute 0.
double inference_loss(const std::vector<Eigen::MatrixXd>& latents, const CompletionOutputs& outputs,
                      const std::map<std::pair<int, int>, std::vector<int>>& pair_rows);

// Same loss over rows where both views of a pair are present per `mask`.
double inference_loss(const std::vector<Eigen::MatrixXd>& latents, const CompletionOutputs& outputs,
                      const dataio::AvailabilityMask& mask);

// Fill z_i^v for A_iv = 0 with the mean of head_{u->v}(z_i^u) over available
// sources u; available entries are untouched.
std::vector<Eigen::MatrixXd> complete_latents(
    const std::vector<Eigen::MatrixXd>& latents,
    const std::map<std::pair<int, int>, network::MlpParams>& heads,
    const dataio::AvailabilityMask& mask);

std::vector<Eigen::MatrixXd> complete_latents(const std::vector<Eigen::MatrixXd>& latents,
                                              const CompletionOutputs& outputs,
                                              const dataio::AvailabilityMask& mask);

}  // namespace hsacc::completion
