#include "hsacc/completion.hpp"

#include <stdexcept>

namespace hsacc::completion {

Eigen::MatrixXd infer_cross_view(const network::MlpParams& head, const Eigen::MatrixXd& z_source) {
  return network::forward(head, z_source);
}

double inference_loss(const std::vector<Eigen::MatrixXd>& latents, const CompletionOutputs& outputs,
                      const std::map<std::pair<int, int>, std::vector<int>>& pair_rows) {
  const int v = static_cast<int>(latents.size());
  if (v < 2) throw std::invalid_argument("inference_loss: need at least 2 views");
  double total = 0.0;
  for (const auto& [pair, q] : outputs.q) {
    const auto [src, dst] = pair;
    if (src < 0 || src >= v || dst < 0 || dst >= v || src == dst)
      throw std::invalid_argument("inference_loss: bad view pair");
    auto it = pair_rows.find(pair);
    if (it == pair_rows.end() || it->second.empty()) continue;
    double pair_sum = 0.0;
    for (int row : it->second)
      pair_sum += (latents[static_cast<size_t>(dst)].row(row) - q.row(row)).squaredNorm();
    total += pair_sum / static_cast<double>(it->second.size());
  }
  return total / (static_cast<double>(v) * (v - 1));
}

double inference_loss(const std::vector<Eigen::MatrixXd>& latents, const CompletionOutputs& outputs,
                      const dataio::AvailabilityMask& mask) {
  std::map<std::pair<int, int>, std::vector<int>> rows;
  for (const auto& [pair, q] : outputs.q) {
    auto& sel = rows[pair];
    for (int i = 0; i < mask.n(); ++i)
      if (mask.available(i, pair.first) && mask.available(i, pair.second)) sel.push_back(i);
  }
  return inference_loss(latents, outputs, rows);
}

std::vector<Eigen::MatrixXd> complete_latents(const std::vector<Eigen::MatrixXd>& latents,
                                              const CompletionOutputs& outputs,
                                              const dataio::AvailabilityMask& mask) {
  const int v = static_cast<int>(latents.size());
  if (mask.v() != v) throw std::invalid_argument("complete_latents: mask width mismatch");
  std::vector<Eigen::MatrixXd> out = latents;
  for (int i = 0; i < mask.n(); ++i) {
    for (int view = 0; view < v; ++view) {
      if (mask.available(i, view)) continue;
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(latents[0].cols());
      int sources = 0;
      for (int src = 0; src < v; ++src) {
        if (src == view || !mask.available(i, src)) continue;
        auto it = outputs.q.find({src, view});
        if (it == outputs.q.end())
          throw std::invalid_argument("complete_latents: missing inference output for pair");
        acc += it->second.row(i);
        ++sources;
      }
      if (sources == 0)
        throw std::invalid_argument("complete_latents: sample with no available view");
      out[static_cast<size_t>(view)].row(i) = acc / sources;
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> complete_latents(
    const std::vector<Eigen::MatrixXd>& latents,
    const std::map<std::pair<int, int>, network::MlpParams>& heads,
    const dataio::AvailabilityMask& mask) {
  CompletionOutputs outputs;
  const int v = static_cast<int>(latents.size());
  for (int src = 0; src < v; ++src)
    for (int dst = 0; dst < v; ++dst) {
      if (src == dst) continue;
      auto it = heads.find({src, dst});
      if (it == heads.end()) throw std::invalid_argument("complete_latents: missing head");
      outputs.q[{src, dst}] = infer_cross_view(it->second, latents[static_cast<size_t>(src)]);
    }
  return complete_latents(latents, outputs, mask);
}

}  // namespace hsacc::completion
