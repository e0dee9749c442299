#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "hsacc/clustering.hpp"
#include "hsacc/config.hpp"
#include "hsacc/dataio.hpp"
#include "hsacc/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hsacc;

namespace {

constexpr const char* kToolVersion = "hsacc 1.0.0";

struct CommonOpts {
  std::string config_path;
  std::string data_dir;
  std::string mask_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

config::KeyValueConfig load_config(const CommonOpts& opts) {
  auto cfg = opts.config_path.empty() ? config::KeyValueConfig::parse_string("")
                                      : config::KeyValueConfig::parse_file(opts.config_path);
  for (const auto& ov : opts.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects KEY=VALUE, got '" + ov + "'");
    cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
  }
  if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
  return cfg;
}

std::pair<dataio::MultiViewDataset, dataio::AvailabilityMask> load_inputs(
    const CommonOpts& opts, const config::KeyValueConfig& cfg) {
  const std::string data_dir = !opts.data_dir.empty() ? opts.data_dir : cfg.get_string("path", "");
  if (data_dir.empty()) throw std::runtime_error("no dataset directory (--data or [data] path)");
  auto ds = dataio::load_dataset(data_dir);

  std::string mask_path = !opts.mask_path.empty() ? opts.mask_path : cfg.get_string("mask", "");
  if (mask_path.empty() && fs::exists(fs::path(data_dir) / "mask.csv"))
    mask_path = (fs::path(data_dir) / "mask.csv").string();
  dataio::AvailabilityMask mask = mask_path.empty()
                                      ? dataio::AvailabilityMask::all_available(ds.n, ds.num_views())
                                      : dataio::load_mask(mask_path);
  if (mask.n() != ds.n || mask.v() != ds.num_views())
    throw std::runtime_error("mask shape does not match dataset");
  if (cfg.get_int("normalize", 1) != 0) ds = dataio::normalize_views(ds, mask);
  return {std::move(ds), std::move(mask)};
}

json report_json(const clustering::ClusteringReport& rep, std::uint64_t seed,
                 const std::string& config_hash) {
  json j;
  if (rep.acc) j["acc"] = *rep.acc;
  if (rep.nmi) j["nmi"] = *rep.nmi;
  if (rep.ari) j["ari"] = *rep.ari;
  j["k"] = rep.k;
  j["inertia"] = rep.inertia;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j;
}

std::string config_snapshot(const config::KeyValueConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : cfg.entries()) s += k + "=" + v + "\n";
  return s;
}

void write_manifest(const CommonOpts& opts, const config::KeyValueConfig& cfg,
                    const std::string& command, double duration_s,
                    const std::vector<std::string>& outputs) {
  json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config"] = json::object();
  for (const auto& [k, v] : cfg.entries()) j["config"][k] = v;
  j["config_hash"] = config::string_hash(config_snapshot(cfg));
  const std::string data_dir = !opts.data_dir.empty() ? opts.data_dir : cfg.get_string("path", "");
  if (!data_dir.empty() && fs::exists(data_dir)) {
    j["dataset_path"] = data_dir;
    std::string combined;
    for (int v = 0;; ++v) {
      const auto p = fs::path(data_dir) / ("view_" + std::to_string(v) + ".csv");
      if (!fs::exists(p)) break;
      combined += config::file_hash(p.string());
    }
    j["dataset_hash"] = config::string_hash(combined);
  }
  std::string mask_path = !opts.mask_path.empty() ? opts.mask_path : cfg.get_string("mask", "");
  if (mask_path.empty() && !data_dir.empty() && fs::exists(fs::path(data_dir) / "mask.csv"))
    mask_path = (fs::path(data_dir) / "mask.csv").string();
  if (!mask_path.empty() && fs::exists(mask_path)) j["mask_hash"] = config::file_hash(mask_path);
  j["seed"] = cfg.get_u64("seed", 0);
  j["duration_seconds"] = duration_s;
  j["outputs"] = outputs;
  std::ofstream os(fs::path(opts.out_dir) / "manifest.json");
  os << j.dump(2) << '\n';
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
}

int cmd_synth(int n, int k, const std::vector<int>& dims, double sep, double noise,
              std::uint64_t seed, const std::string& out) {
  auto ds = dataio::synth_gaussian(n, k, dims, sep, noise, seed);
  dataio::save_dataset(out, ds);
  std::cout << "wrote " << dims.size() << " views + labels to " << out << "\n";
  return 0;
}

int cmd_mask(const CommonOpts& opts, double rate, std::uint64_t seed) {
  auto cfg = load_config(opts);
  const std::string data_dir = !opts.data_dir.empty() ? opts.data_dir : cfg.get_string("path", "");
  if (data_dir.empty()) throw std::runtime_error("mask: --data required");
  auto ds = dataio::load_dataset(data_dir);
  auto mask = dataio::generate_mask(ds.n, ds.num_views(), rate, seed);
  fs::create_directories(opts.out_dir);
  const std::string path = (fs::path(opts.out_dir) / "mask.csv").string();
  dataio::save_mask(path, mask);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_train(const CommonOpts& opts, bool evaluate_only, const std::string& checkpoint_in) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = load_config(opts);
  auto tc = config::train_config_from(cfg);
  auto [ds, mask] = load_inputs(opts, cfg);
  fs::create_directories(opts.out_dir);

  trainer::TrainedModel model;
  std::vector<std::string> outputs;
  if (evaluate_only) {
    model = trainer::model_from_named_mlps(network::load_checkpoint(checkpoint_in));
  } else {
    auto result = trainer::train(tc, ds, mask);
    model = std::move(result.model);
    const std::string hist = (fs::path(opts.out_dir) / "history.csv").string();
    trainer::write_history_csv(hist, result.history, ds.num_views());
    outputs.push_back(hist);
    const std::string ckpt = (fs::path(opts.out_dir) / "checkpoint.bin").string();
    network::save_checkpoint(ckpt, trainer::to_named_mlps(model));
    outputs.push_back(ckpt);
  }

  auto report = trainer::evaluate(model, ds, mask, tc);
  const std::string report_path = (fs::path(opts.out_dir) / "report.json").string();
  {
    std::ofstream os(report_path);
    os << report_json(report, tc.seed, config::string_hash(config_snapshot(cfg))).dump(2) << '\n';
  }
  outputs.push_back(report_path);

  const Eigen::MatrixXd embeddings = trainer::concat_completed_latents(model, ds, mask);
  const std::string emb_path = (fs::path(opts.out_dir) / "embeddings.csv").string();
  write_matrix_csv(emb_path, embeddings);
  outputs.push_back(emb_path);
  for (int v = 0; v < ds.num_views(); ++v) {
    const std::string p =
        (fs::path(opts.out_dir) / ("completed_latents_view" + std::to_string(v) + ".csv")).string();
    write_matrix_csv(p, embeddings.middleCols(static_cast<Eigen::Index>(v) * model.latent_dim,
                                              model.latent_dim));
    outputs.push_back(p);
  }

  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(opts, cfg, evaluate_only ? "evaluate" : "train", dt, outputs);
  if (report.acc)
    std::cout << "acc=" << *report.acc << " nmi=" << *report.nmi << " ari=" << *report.ari << "\n";
  std::cout << "inertia=" << report.inertia << " k=" << report.k << "\n";
  return 0;
}

int cmd_ablate(const CommonOpts& opts, const std::string& grid_spec) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = load_config(opts);
  auto tc = config::train_config_from(cfg);
  auto [ds, mask] = load_inputs(opts, cfg);
  fs::create_directories(opts.out_dir);

  std::vector<unsigned> subsets;
  if (grid_spec.empty() || grid_spec == "all") {
    subsets = trainer::full_ablation_grid();
  } else {
    std::stringstream ss(grid_spec);
    std::string item;
    while (std::getline(ss, item, ',')) subsets.push_back(static_cast<unsigned>(std::stoul(item)));
  }
  auto rows = trainer::run_ablation(tc, ds, mask, subsets);

  const std::string path = (fs::path(opts.out_dir) / "ablation.csv").string();
  std::ofstream os(path);
  os.precision(17);
  os << "model,terms,acc,nmi,ari,inertia,error\n";
  bool any_error = false;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    os << "M-" << (i + 1) << ',' << row.name << ',';
    if (row.report && row.report->acc) os << *row.report->acc;
    os << ',';
    if (row.report && row.report->nmi) os << *row.report->nmi;
    os << ',';
    if (row.report && row.report->ari) os << *row.report->ari;
    os << ',';
    if (row.report) os << row.report->inertia;
    os << ',' << row.error << '\n';
    any_error = any_error || !row.error.empty();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(opts, cfg, "ablate", dt, {path});
  std::cout << "wrote " << path << "\n";
  return any_error ? 2 : 0;
}

int cmd_sweep(const CommonOpts& opts, int lambda_index, const std::vector<double>& values) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = load_config(opts);
  auto tc = config::train_config_from(cfg);
  auto [ds, mask] = load_inputs(opts, cfg);
  fs::create_directories(opts.out_dir);

  std::array<std::vector<double>, 4> grids;
  if (lambda_index < 1 || lambda_index > 4)
    throw std::runtime_error("sweep: --lambda must be 1..4");
  grids[static_cast<size_t>(lambda_index - 1)] = values;
  auto rows = trainer::run_lambda_sweep(tc, ds, mask, grids);

  const std::string path = (fs::path(opts.out_dir) / "sweep.csv").string();
  std::ofstream os(path);
  os.precision(17);
  os << "lambda,value,acc,nmi,ari,inertia,error\n";
  bool any_error = false;
  for (const auto& row : rows) {
    os << "lambda" << (row.lambda_index + 1) << ',' << row.value << ',';
    if (row.report && row.report->acc) os << *row.report->acc;
    os << ',';
    if (row.report && row.report->nmi) os << *row.report->nmi;
    os << ',';
    if (row.report && row.report->ari) os << *row.report->ari;
    os << ',';
    if (row.report) os << row.report->inertia;
    os << ',' << row.error << '\n';
    any_error = any_error || !row.error.empty();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(opts, cfg, "sweep", dt, {path});
  std::cout << "wrote " << path << "\n";
  return any_error ? 2 : 0;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "config file (key=value with [sections])");
  cmd->add_option("--data", opts.data_dir, "dataset directory");
  cmd->add_option("--mask", opts.mask_path, "availability mask csv");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
  cmd->add_option("--set", opts.overrides, "override config key (KEY=VALUE, repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HSACC incomplete multi-view clustering"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic multi-view dataset");
  int s_n = 1000, s_k = 4;
  std::vector<int> s_dims{10, 10};
  double s_sep = 10.0, s_noise = 0.5;
  std::uint64_t s_seed = 1;
  std::string s_out = "synth_data";
  synth->add_option("--n", s_n, "samples")->check(CLI::PositiveNumber);
  synth->add_option("--k", s_k, "clusters")->check(CLI::Range(2, 1 << 20));
  synth->add_option("--dims", s_dims, "per-view dims (comma separated)")->delimiter(',');
  synth->add_option("--sep", s_sep, "cluster separation");
  synth->add_option("--noise", s_noise, "noise stddev");
  synth->add_option("--seed", s_seed, "seed");
  synth->add_option("--out", s_out, "output directory")->required();

  // mask
  auto* maskc = app.add_subcommand("mask", "generate an availability mask");
  CommonOpts m_opts;
  double m_rate = 0.5;
  std::uint64_t m_seed = 0;
  add_common(maskc, m_opts);
  maskc->add_option("--rate", m_rate, "missing rate in [0,1)")
      ->check(CLI::Range(0.0, 0.999999));
  maskc->add_option("--mask-seed", m_seed, "mask seed");

  // train / evaluate
  auto* train = app.add_subcommand("train", "train and evaluate");
  CommonOpts t_opts;
  add_common(train, t_opts);

  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint");
  CommonOpts e_opts;
  std::string e_ckpt;
  add_common(eval, e_opts);
  eval->add_option("--checkpoint", e_ckpt, "checkpoint file")->required();

  // ablate / sweep
  auto* ablate = app.add_subcommand("ablate", "loss-term ablation grid");
  CommonOpts a_opts;
  std::string a_grid = "all";
  add_common(ablate, a_opts);
  ablate->add_option("--grid", a_grid, "'all' or comma-separated subset bitmasks (REC=1,INF=2,MMI=4,MMD=8)");

  auto* sweep = app.add_subcommand("sweep", "single-lambda sweep");
  CommonOpts w_opts;
  int w_lambda = 1;
  std::vector<double> w_values{0.01, 0.1, 1.0, 10.0, 100.0};
  add_common(sweep, w_opts);
  sweep->add_option("--lambda", w_lambda, "which lambda to sweep (1..4)");
  sweep->add_option("--values", w_values, "grid values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(s_n, s_k, s_dims, s_sep, s_noise, s_seed, s_out);
    if (maskc->parsed()) {
      if (m_opts.seed) m_seed = *m_opts.seed;
      return cmd_mask(m_opts, m_rate, m_seed);
    }
    if (train->parsed()) return cmd_train(t_opts, false, "");
    if (eval->parsed()) return cmd_train(e_opts, true, e_ckpt);
    if (ablate->parsed()) return cmd_ablate(a_opts, a_grid);
    if (sweep->parsed()) return cmd_sweep(w_opts, w_lambda, w_values);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
