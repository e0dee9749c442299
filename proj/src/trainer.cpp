#include "hsacc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hsacc::trainer {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed * 0x100000001b3ull + stream);
}

int class_count(const std::vector<int>& labels) {
  std::set<int> s(labels.begin(), labels.end());
  return static_cast<int>(s.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0 || warmup < 0 || warmup > epochs)
    throw std::invalid_argument("config: need 0 <= warmup <= epochs");
  if (batch_size < 2) throw std::invalid_argument("config: batch_size must be >= 2");
  for (double l : lambdas)
    if (l < 0 || !std::isfinite(l)) throw std::invalid_argument("config: lambdas must be >= 0");
  if (lr <= 0) throw std::invalid_argument("config: lr must be positive");
  if (latent_dim < 1) throw std::invalid_argument("config: latent_dim must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("config: eval_every must be >= 1");
  if (restarts < 1) throw std::invalid_argument("config: restarts must be >= 1");
}

double total_loss(const LossTerms& terms, const std::array<double, 4>& lambdas) {
  for (double t : {terms.rec, terms.inf, terms.mmi, terms.mmd})
    if (!std::isfinite(t)) throw std::invalid_argument("total_loss: non-finite component");
  return lambdas[0] * terms.rec + lambdas[1] * terms.inf + lambdas[2] * terms.mmi +
         lambdas[3] * terms.mmd;
}

std::vector<Eigen::MatrixXd> TrainedModel::encode(const dataio::MultiViewDataset& ds) const {
  if (ds.num_views() != static_cast<int>(encoders.size()))
    throw std::invalid_argument("encode: view count mismatch");
  std::vector<Eigen::MatrixXd> z;
  for (int v = 0; v < ds.num_views(); ++v)
    z.push_back(network::forward(encoders[static_cast<size_t>(v)], ds.views[static_cast<size_t>(v)]));
  return z;
}

namespace {

struct NetSlot {
  network::MlpParams* params;
  network::OptimizerState* opt;
  network::MlpVars vars;  // valid within one tape
};

std::vector<int> layer_dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

TrainResult train(const TrainConfig& config, const dataio::MultiViewDataset& ds,
                  const dataio::AvailabilityMask& mask) {
  config.validate();
  const int v_count = ds.num_views();
  if (v_count < 2) throw std::invalid_argument("train: need at least 2 views");
  if (mask.n() != ds.n || mask.v() != v_count)
    throw std::invalid_argument("train: mask shape mismatch");
  const int d_lat = config.latent_dim;

  TrainResult result;
  auto& model = result.model;
  model.latent_dim = d_lat;
  std::vector<network::OptimizerState> enc_opt, dec_opt;
  std::map<std::pair<int, int>, network::OptimizerState> head_opt;

  for (int v = 0; v < v_count; ++v) {
    std::vector<int> rev(config.encoder_hidden.rbegin(), config.encoder_hidden.rend());
    model.encoders.push_back(network::init_mlp(layer_dims(ds.dims[static_cast<size_t>(v)],
                                                          config.encoder_hidden, d_lat),
                                               derive_seed(config.seed, 100 + v)));
    model.decoders.push_back(network::init_mlp(layer_dims(d_lat, rev, ds.dims[static_cast<size_t>(v)]),
                                               derive_seed(config.seed, 200 + v)));
    enc_opt.push_back(network::init_optimizer(model.encoders.back()));
    dec_opt.push_back(network::init_optimizer(model.decoders.back()));
  }
  for (int a = 0; a < v_count; ++a)
    for (int b = 0; b < v_count; ++b) {
      if (a == b) continue;
      model.heads[{a, b}] = network::init_mlp(layer_dims(d_lat, config.inference_hidden, d_lat),
                                              derive_seed(config.seed, 300 + a * v_count + b));
      head_opt[{a, b}] = network::init_optimizer(model.heads[{a, b}]);
    }

  const double lam_rec = config.lambdas[0], lam_inf = config.lambdas[1];
  const double lam_mmi = config.lambdas[2], lam_mmd = config.lambdas[3];

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<int> order(static_cast<size_t>(ds.n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    const bool inf_active = epoch >= config.warmup;
    LossTerms epoch_terms;
    Eigen::VectorXd epoch_weights = Eigen::VectorXd::Zero(v_count);
    int batches = 0, weight_batches = 0;

    for (int start = 0; start < ds.n; start += config.batch_size) {
      const int bsz = std::min(config.batch_size, ds.n - start);
      std::vector<int> rows(order.begin() + start, order.begin() + start + bsz);

      ad::Tape tape;
      std::vector<NetSlot> slots;
      std::vector<network::MlpVars> enc_vars(static_cast<size_t>(v_count));
      std::vector<network::MlpVars> dec_vars(static_cast<size_t>(v_count));
      std::map<std::pair<int, int>, network::MlpVars> head_vars;
      for (int v = 0; v < v_count; ++v) {
        enc_vars[static_cast<size_t>(v)] = network::register_params(tape, model.encoders[static_cast<size_t>(v)]);
        dec_vars[static_cast<size_t>(v)] = network::register_params(tape, model.decoders[static_cast<size_t>(v)]);
        slots.push_back({&model.encoders[static_cast<size_t>(v)], &enc_opt[static_cast<size_t>(v)], enc_vars[static_cast<size_t>(v)]});
        slots.push_back({&model.decoders[static_cast<size_t>(v)], &dec_opt[static_cast<size_t>(v)], dec_vars[static_cast<size_t>(v)]});
      }
      if (inf_active) {
        for (auto& [pair, params] : model.heads) {
          head_vars[pair] = network::register_params(tape, params);
          slots.push_back({&params, &head_opt[pair], head_vars[pair]});
        }
      }

      // per view: positions of available batch rows, their latent codes, rec loss
      std::vector<std::vector<int>> avail_rows(static_cast<size_t>(v_count));  // global row ids
      std::vector<std::map<int, int>> local_pos(static_cast<size_t>(v_count)); // global -> row in z
      std::vector<ad::Var> z(static_cast<size_t>(v_count));
      ad::Var rec_var;
      for (int v = 0; v < v_count; ++v) {
        auto& av = avail_rows[static_cast<size_t>(v)];
        for (int r : rows)
          if (mask.available(r, v)) {
            local_pos[static_cast<size_t>(v)][r] = static_cast<int>(av.size());
            av.push_back(r);
          }
        if (av.empty()) continue;
        Eigen::MatrixXd xb(static_cast<Eigen::Index>(av.size()), ds.dims[static_cast<size_t>(v)]);
        for (size_t i = 0; i < av.size(); ++i)
          xb.row(static_cast<Eigen::Index>(i)) = ds.views[static_cast<size_t>(v)].row(av[i]);
        ad::Var x = tape.input(xb);
        z[static_cast<size_t>(v)] = network::forward(tape, enc_vars[static_cast<size_t>(v)], x);
        ad::Var xhat = network::forward(tape, dec_vars[static_cast<size_t>(v)], z[static_cast<size_t>(v)]);
        ad::Var term = tape.scale(tape.squared_norm(tape.sub(x, xhat)),
                                  1.0 / static_cast<double>(av.size()));
        rec_var = rec_var.valid() ? tape.add(rec_var, term) : term;
      }

      // mutual information over per-pair complete subsets
      ad::Var mmi_var;
      int mmi_pairs = 0;
      for (int a = 0; a < v_count; ++a)
        for (int b = a + 1; b < v_count; ++b) {
          std::vector<int> pa, pb;
          for (int r : rows)
            if (mask.available(r, a) && mask.available(r, b)) {
              pa.push_back(local_pos[static_cast<size_t>(a)][r]);
              pb.push_back(local_pos[static_cast<size_t>(b)][r]);
            }
          if (pa.empty()) continue;
          ad::Var term = alignment::mutual_information_loss(
              tape, tape.select_rows(z[static_cast<size_t>(a)], pa),
              tape.select_rows(z[static_cast<size_t>(b)], pb));
          mmi_var = mmi_var.valid() ? tape.add(mmi_var, term) : term;
          ++mmi_pairs;
        }
      if (mmi_var.valid()) mmi_var = tape.scale(mmi_var, 1.0 / mmi_pairs);

      // fusion + MMD over the subset available in every view
      std::vector<int> complete;
      for (int r : rows) {
        bool all = true;
        for (int v = 0; v < v_count; ++v) all = all && mask.available(r, v);
        if (all) complete.push_back(r);
      }
      ad::Var mmd_var;
      alignment::ViewWeights weights;
      if (!complete.empty()) {
        std::vector<ad::Var> zc;
        std::vector<Eigen::MatrixXd> zc_val;
        for (int v = 0; v < v_count; ++v) {
          std::vector<int> pos;
          for (int r : complete) pos.push_back(local_pos[static_cast<size_t>(v)][r]);
          zc.push_back(tape.select_rows(z[static_cast<size_t>(v)], pos));
          zc_val.push_back(tape.value(zc.back()));
        }
        Eigen::MatrixXd r_fused = zc_val[0];
        for (int v = 1; v < v_count; ++v) r_fused += zc_val[static_cast<size_t>(v)];
        r_fused /= static_cast<double>(v_count);
        Eigen::VectorXd disc(v_count);
        for (int v = 0; v < v_count; ++v)
          disc(v) = alignment::view_discrepancy(zc_val[static_cast<size_t>(v)], r_fused);
        weights = alignment::view_weights(disc);  // constants for backprop
        ad::Var h = tape.scale(zc[0], weights.w(0));
        for (int v = 1; v < v_count; ++v)
          h = tape.add(h, tape.scale(zc[static_cast<size_t>(v)], weights.w(v)));
        mmd_var = alignment::mmd_alignment_loss(tape, zc, h, config.kernel);
      }

      // inference consistency over per-pair complete subsets
      ad::Var inf_var;
      if (inf_active) {
        ad::Var acc;
        for (int a = 0; a < v_count; ++a)
          for (int b = 0; b < v_count; ++b) {
            if (a == b) continue;
            std::vector<int> pa, pb;
            for (int r : rows)
              if (mask.available(r, a) && mask.available(r, b)) {
                pa.push_back(local_pos[static_cast<size_t>(a)][r]);
                pb.push_back(local_pos[static_cast<size_t>(b)][r]);
              }
            if (pa.empty()) continue;
            ad::Var q = network::forward(tape, head_vars[{a, b}],
                                         tape.select_rows(z[static_cast<size_t>(a)], pa));
            ad::Var diff = tape.sub(tape.select_rows(z[static_cast<size_t>(b)], pb), q);
            ad::Var term = tape.scale(tape.squared_norm(diff), 1.0 / static_cast<double>(pa.size()));
            acc = acc.valid() ? tape.add(acc, term) : term;
          }
        if (acc.valid())
          inf_var = tape.scale(acc, 1.0 / (static_cast<double>(v_count) * (v_count - 1)));
      }

      LossTerms terms;
      terms.rec = rec_var.valid() ? tape.scalar(rec_var) : 0.0;
      terms.inf = inf_var.valid() ? tape.scalar(inf_var) : 0.0;
      terms.mmi = mmi_var.valid() ? tape.scalar(mmi_var) : 0.0;
      terms.mmd = mmd_var.valid() ? tape.scalar(mmd_var) : 0.0;
      terms.total = total_loss(terms, config.lambdas);
      if (!std::isfinite(terms.total))
        throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch + 1) + ", batch " +
                                 std::to_string(start / config.batch_size + 1));
      // linearity identity, checked every batch
      const double recon = lam_rec * terms.rec + lam_inf * terms.inf + lam_mmi * terms.mmi +
                           lam_mmd * terms.mmd;
      if (std::abs(recon - terms.total) > 1e-9)
        throw std::runtime_error("loss linearity violated");

      // weighted objective; zero-lambda terms stay off the backward path
      ad::Var objective;
      auto add_term = [&](ad::Var term, double lam) {
        if (!term.valid() || lam == 0.0) return;
        ad::Var scaled = tape.scale(term, lam);
        objective = objective.valid() ? tape.add(objective, scaled) : scaled;
      };
      add_term(rec_var, lam_rec);
      add_term(inf_var, lam_inf);
      add_term(mmi_var, lam_mmi);
      add_term(mmd_var, lam_mmd);

      if (objective.valid()) {
        tape.backward(objective);
        std::vector<network::MlpGrads> grads;
        grads.reserve(slots.size());
        double sq_norm = 0.0;
        for (auto& slot : slots) {
          grads.push_back(network::collect_grads(tape, slot.vars));
          for (const auto& layer : grads.back().layers)
            sq_norm += layer.w.squaredNorm() + layer.b.squaredNorm();
        }
        const double norm = std::sqrt(sq_norm);
        if (config.clip_norm > 0.0 && norm > config.clip_norm) {
          const double s = config.clip_norm / norm;
          for (auto& g : grads)
            for (auto& layer : g.layers) {
              layer.w *= s;
              layer.b *= s;
            }
        }
        for (size_t i = 0; i < slots.size(); ++i)
          network::adam_step(*slots[i].params, grads[i], *slots[i].opt, config.lr);
      }

      epoch_terms.rec += terms.rec;
      epoch_terms.inf += terms.inf;
      epoch_terms.mmi += terms.mmi;
      epoch_terms.mmd += terms.mmd;
      epoch_terms.total += terms.total;
      if (weights.w.size() == v_count) {
        epoch_weights += weights.w;
        ++weight_batches;
      }
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.terms.rec = epoch_terms.rec / batches;
    rec.terms.inf = epoch_terms.inf / batches;
    rec.terms.mmi = epoch_terms.mmi / batches;
    rec.terms.mmd = epoch_terms.mmd / batches;
    rec.terms.total = epoch_terms.total / batches;
    rec.weights = weight_batches > 0 ? (epoch_weights / weight_batches).eval()
                                     : Eigen::VectorXd::Constant(v_count, 1.0 / v_count);
    if ((epoch + 1) % config.eval_every == 0 || epoch + 1 == config.epochs) {
      if (ds.labels) {
        auto report = evaluate(model, ds, mask, config);
        rec.acc = report.acc;
        rec.nmi = report.nmi;
        rec.ari = report.ari;
      }
    }
    result.history.push_back(std::move(rec));
  }
  return result;
}

Eigen::MatrixXd concat_completed_latents(const TrainedModel& model,
                                         const dataio::MultiViewDataset& ds,
                                         const dataio::AvailabilityMask& mask) {
  auto z = model.encode(ds);
  auto completed = completion::complete_latents(z, model.heads, mask);
  const int d = model.latent_dim;
  Eigen::MatrixXd out(ds.n, static_cast<Eigen::Index>(completed.size()) * d);
  for (size_t v = 0; v < completed.size(); ++v)
    out.middleCols(static_cast<Eigen::Index>(v) * d, d) = completed[v];
  return out;
}

clustering::ClusteringReport evaluate(const TrainedModel& model, const dataio::MultiViewDataset& ds,
                                      const dataio::AvailabilityMask& mask,
                                      const TrainConfig& config) {
  int k = config.k;
  if (ds.labels) k = class_count(*ds.labels);
  if (k < 1) throw std::invalid_argument("evaluate: no labels and no k configured");
  const Eigen::MatrixXd features = concat_completed_latents(model, ds, mask);
  return clustering::cluster_and_score(features, k, config.restarts,
                                       derive_seed(config.seed, 777), ds.labels);
}

std::vector<unsigned> full_ablation_grid() {
  std::vector<unsigned> grid;
  for (unsigned s = 1; s <= 15; ++s) grid.push_back(s);
  return grid;
}

namespace {
std::string subset_name(unsigned subset) {
  std::string name;
  auto append = [&](const char* tag) {
    if (!name.empty()) name += '+';
    name += tag;
  };
  if (subset & kRec) append("REC");
  if (subset & kInf) append("INF");
  if (subset & kMmi) append("MMI");
  if (subset & kMmd) append("MMD");
  return name;
}
}  // namespace

std::vector<AblationRow> run_ablation(const TrainConfig& config, const dataio::MultiViewDataset& ds,
                                      const dataio::AvailabilityMask& mask,
                                      const std::vector<unsigned>& subsets) {
  std::vector<AblationRow> rows;
  for (unsigned subset : subsets) {
    AblationRow row;
    row.subset = subset;
    row.name = subset_name(subset);
    if (subset == 0 || subset > 15) {
      row.error = "invalid subset";
      rows.push_back(std::move(row));
      continue;
    }
    TrainConfig cell = config;
    cell.lambdas[0] = (subset & kRec) ? config.lambdas[0] : 0.0;
    cell.lambdas[1] = (subset & kInf) ? config.lambdas[1] : 0.0;
    cell.lambdas[2] = (subset & kMmi) ? config.lambdas[2] : 0.0;
    cell.lambdas[3] = (subset & kMmd) ? config.lambdas[3] : 0.0;
    try {
      auto trained = train(cell, ds, mask);
      row.report = evaluate(trained.model, ds, mask, cell);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> run_lambda_sweep(const TrainConfig& config,
                                       const dataio::MultiViewDataset& ds,
                                       const dataio::AvailabilityMask& mask,
                                       const std::array<std::vector<double>, 4>& grids) {
  std::vector<SweepRow> rows;
  for (int li = 0; li < 4; ++li) {
    for (double value : grids[static_cast<size_t>(li)]) {
      SweepRow row;
      row.lambda_index = li;
      row.value = value;
      TrainConfig cell = config;
      cell.lambdas[static_cast<size_t>(li)] = value;
      try {
        auto trained = train(cell, ds, mask);
        row.report = evaluate(trained.model, ds, mask, cell);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history,
                       int num_views) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "epoch,rec,inf,mmi,mmd,total";
  for (int v = 0; v < num_views; ++v) os << ",w_" << v;
  os << ",acc,nmi,ari\n";
  os.precision(17);
  for (const auto& rec : history) {
    os << rec.epoch << ',' << rec.terms.rec << ',' << rec.terms.inf << ',' << rec.terms.mmi << ','
       << rec.terms.mmd << ',' << rec.terms.total;
    for (int v = 0; v < num_views; ++v) os << ',' << rec.weights(v);
    os << ',';
    if (rec.acc) os << *rec.acc;
    os << ',';
    if (rec.nmi) os << *rec.nmi;
    os << ',';
    if (rec.ari) os << *rec.ari;
    os << '\n';
  }
}

std::vector<network::NamedMlp> to_named_mlps(const TrainedModel& model) {
  std::vector<network::NamedMlp> nets;
  for (size_t v = 0; v < model.encoders.size(); ++v)
    nets.push_back({"encoder_" + std::to_string(v), model.encoders[v]});
  for (size_t v = 0; v < model.decoders.size(); ++v)
    nets.push_back({"decoder_" + std::to_string(v), model.decoders[v]});
  for (const auto& [pair, params] : model.heads)
    nets.push_back({"head_" + std::to_string(pair.first) + "_" + std::to_string(pair.second), params});
  return nets;
}

TrainedModel model_from_named_mlps(const std::vector<network::NamedMlp>& nets) {
  TrainedModel model;
  std::map<int, network::MlpParams> enc, dec;
  for (const auto& net : nets) {
    std::stringstream ss(net.name);
    std::string kind;
    std::getline(ss, kind, '_');
    if (kind == "encoder") {
      int v;
      ss >> v;
      enc[v] = net.params;
    } else if (kind == "decoder") {
      int v;
      ss >> v;
      dec[v] = net.params;
    } else if (kind == "head") {
      int a, b;
      char sep;
      ss >> a >> sep >> b;
      model.heads[{a, b}] = net.params;
    } else {
      throw std::runtime_error("checkpoint: unknown network name: " + net.name);
    }
  }
  for (auto& [v, p] : enc) model.encoders.push_back(std::move(p));
  for (auto& [v, p] : dec) model.decoders.push_back(std::move(p));
  if (model.encoders.empty()) throw std::runtime_error("checkpoint: no encoders");
  model.latent_dim = model.encoders[0].out_dim();
  return model;
}

}  // namespace hsacc::trainer
