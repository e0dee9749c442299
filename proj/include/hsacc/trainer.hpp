#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsacc/alignment.hpp"
#include "hsacc/clustering.hpp"
#include "hsacc/completion.hpp"
#include "hsacc/dataio.hpp"
#include "hsacc/network.hpp"

namespace hsacc::trainer {

struct TrainConfig {
  std::array<double, 4> lambdas{0.1, 0.1, 10.0, 1.0};  // rec, inf, mmi, mmd
  int epochs = 500;
  int warmup = 100;  // inference loss joins at this epoch (0-based)
  double lr = 1e-4;
  int batch_size = 256;
  int latent_dim = 128;
  std::vector<int> encoder_hidden{1024, 1024, 1024};
  std::vector<int> inference_hidden{256, 128, 256};
  alignment::Kernel kernel = alignment::Kernel::Linear;
  std::uint64_t seed = 0;
  int k = 0;  // 0: use the number of distinct labels
  int restarts = 50;
  int eval_every = 10;
  int ckpt_every = 0;
  double clip_norm = 5.0;

  void validate() const;
};

struct LossTerms {
  double rec = 0, inf = 0, mmi = 0, mmd = 0;
  double total = 0;
};

double total_loss(const LossTerms& terms, const std::array<double, 4>& lambdas);

struct TrainedModel {
  std::vector<network::MlpParams> encoders;
  std::vector<network::MlpParams> decoders;
  std::map<std::pair<int, int>, network::MlpParams> heads;
  int latent_dim = 0;

  std::vector<Eigen::MatrixXd> encode(const dataio::MultiViewDataset& ds) const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based in history output
  LossTerms terms;
  Eigen::VectorXd weights;
  std::optional<double> acc, nmi, ari;
};

struct TrainResult {
  TrainedModel model;
  std::vector<EpochRecord> history;
};

TrainResult train(const TrainConfig& config, const dataio::MultiViewDataset& ds,
                  const dataio::AvailabilityMask& mask);

// Encode, complete missing latents through the inference heads, concatenate
// all views column-wise (ascending view index): N x (V*D).
Eigen::MatrixXd concat_completed_latents(const TrainedModel& model,
                                         const dataio::MultiViewDataset& ds,
                                         const dataio::AvailabilityMask& mask);

clustering::ClusteringReport evaluate(const TrainedModel& model, const dataio::MultiViewDataset& ds,
                                      const dataio::AvailabilityMask& mask,
                                      const TrainConfig& config);

// Loss-term subsets as bitmasks: REC=1, INF=2, MMI=4, MMD=8.
enum Term : unsigned { kRec = 1, kInf = 2, kMmi = 4, kMmd = 8 };

struct AblationRow {
  unsigned subset = 0;
  std::string name;
  std::optional<clustering::ClusteringReport> report;
  std::string error;
};

std::vector<AblationRow> run_ablation(const TrainConfig& config, const dataio::MultiViewDataset& ds,
                                      const dataio::AvailabilityMask& mask,
                                      const std::vector<unsigned>& subsets);

// All 15 nonempty subsets in Table-2 order (M-1 .. M-15).
std::vector<unsigned> full_ablation_grid();

struct SweepRow {
  int lambda_index = 0;  // 0..3
  double value = 0;
  std::optional<clustering::ClusteringReport> report;
  std::string error;
};

std::vector<SweepRow> run_lambda_sweep(const TrainConfig& config,
                                       const dataio::MultiViewDataset& ds,
                                       const dataio::AvailabilityMask& mask,
                                       const std::array<std::vector<double>, 4>& grids);

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history,
                       int num_views);

std::vector<network::NamedMlp> to_named_mlps(const TrainedModel& model);
TrainedModel model_from_named_mlps(const std::vector<network::NamedMlp>& nets);

}  // namespace hsacc::trainer
