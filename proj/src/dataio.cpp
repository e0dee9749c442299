#include "hsacc/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace hsacc::dataio {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s, int view, int row, int col) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  // allow trailing whitespace only
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos == 0 || pos != s.size())
    throw std::runtime_error("non-numeric cell at view " + std::to_string(view) + ", row " +
                             std::to_string(row) + ", col " + std::to_string(col));
  if (!std::isfinite(v))
    throw std::runtime_error("non-finite cell at view " + std::to_string(view) + ", row " +
                             std::to_string(row) + ", col " + std::to_string(col));
  return v;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path, int view) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int row = 0;
  size_t width = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (row == 0) width = cells.size();
    if (cells.size() != width)
      throw std::runtime_error("ragged row " + std::to_string(row) + " in " + path);
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (size_t c = 0; c < cells.size(); ++c)
      vals.push_back(parse_cell(cells[c], view, row, static_cast<int>(c)));
    rows.push_back(std::move(vals));
    ++row;
  }
  if (rows.empty()) throw std::runtime_error("empty csv: " + path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < width; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace

AvailabilityMask AvailabilityMask::all_available(int n, int v) {
  AvailabilityMask m;
  m.entries = Eigen::MatrixXi::Ones(n, v);
  return m;
}

MultiViewDataset load_dataset(const std::string& dir_path) {
  MultiViewDataset ds;
  int v = 0;
  while (fs::exists(fs::path(dir_path) / ("view_" + std::to_string(v) + ".csv"))) ++v;
  if (v == 0) throw std::runtime_error("no view_0.csv under " + dir_path);
  for (int i = 0; i < v; ++i) {
    auto m = read_csv_matrix((fs::path(dir_path) / ("view_" + std::to_string(i) + ".csv")).string(), i);
    if (i > 0 && m.rows() != ds.views[0].rows())
      throw std::runtime_error("row-count mismatch: view " + std::to_string(i) + " has " +
                               std::to_string(m.rows()) + " rows, view 0 has " +
                               std::to_string(ds.views[0].rows()));
    ds.dims.push_back(static_cast<int>(m.cols()));
    ds.views.push_back(std::move(m));
  }
  ds.n = static_cast<int>(ds.views[0].rows());

  const auto labels_path = fs::path(dir_path) / "labels.csv";
  if (fs::exists(labels_path)) {
    std::ifstream is(labels_path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      try {
        labels.push_back(std::stoi(line));
      } catch (const std::exception&) {
        throw std::runtime_error("non-integer label at line " + std::to_string(labels.size()));
      }
      if (labels.back() < 0) throw std::runtime_error("negative label");
    }
    if (static_cast<int>(labels.size()) != ds.n)
      throw std::runtime_error("labels.csv has " + std::to_string(labels.size()) +
                               " entries, expected " + std::to_string(ds.n));
    ds.labels = std::move(labels);
  }
  return ds;
}

void save_dataset(const std::string& dir_path, const MultiViewDataset& ds) {
  fs::create_directories(dir_path);
  for (size_t v = 0; v < ds.views.size(); ++v)
    write_csv_matrix((fs::path(dir_path) / ("view_" + std::to_string(v) + ".csv")).string(),
                     ds.views[v]);
  if (ds.labels) {
    std::ofstream os(fs::path(dir_path) / "labels.csv");
    for (int l : *ds.labels) os << l << '\n';
  }
}

AvailabilityMask load_mask(const std::string& path) {
  auto m = read_csv_matrix(path, 0);
  AvailabilityMask mask;
  mask.entries.resize(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0 && m(i, j) != 1.0)
        throw std::runtime_error("mask entries must be 0 or 1 (row " + std::to_string(i) + ")");
      mask.entries(i, j) = static_cast<int>(m(i, j));
      any = any || mask.entries(i, j) != 0;
    }
    if (!any) throw std::runtime_error("mask row " + std::to_string(i) + " has no available view");
  }
  return mask;
}

void save_mask(const std::string& path, const AvailabilityMask& mask) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  for (Eigen::Index i = 0; i < mask.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.entries.cols(); ++j) {
      if (j) os << ',';
      os << mask.entries(i, j);
    }
    os << '\n';
  }
}

AvailabilityMask generate_mask(int n, int v, double missing_rate, std::uint64_t seed) {
  if (v < 2) throw std::invalid_argument("generate_mask: need v >= 2");
  if (missing_rate < 0.0 || missing_rate >= 1.0)
    throw std::invalid_argument("generate_mask: missing_rate must be in [0,1)");

  std::mt19937_64 rng(seed);
  AvailabilityMask mask = AvailabilityMask::all_available(n, v);

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const int incomplete = static_cast<int>(std::lround(missing_rate * n));
  for (int idx = 0; idx < incomplete; ++idx) {
    const int row = order[static_cast<size_t>(idx)];
    if (v == 2) {
      std::uniform_int_distribution<int> pick(0, 1);
      mask.entries(row, pick(rng)) = 0;
    } else {
      // uniformly random nonempty proper subset of views to remove
      std::uniform_int_distribution<std::uint64_t> bits(1, (1ull << v) - 2);
      const std::uint64_t removed = bits(rng);
      for (int j = 0; j < v; ++j)
        if (removed & (1ull << j)) mask.entries(row, j) = 0;
    }
  }
  return mask;
}

namespace {
MultiViewDataset normalize_impl(const MultiViewDataset& ds, const AvailabilityMask* mask) {
  MultiViewDataset out = ds;
  for (size_t v = 0; v < out.views.size(); ++v) {
    auto& m = out.views[v];
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (mask && !mask->available(static_cast<int>(r), static_cast<int>(v))) continue;
        lo = std::min(lo, m(r, c));
        hi = std::max(hi, m(r, c));
      }
      const double range = hi - lo;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        m(r, c) = (range > 0.0 && std::isfinite(range)) ? (m(r, c) - lo) / range : 0.0;
    }
  }
  return out;
}
}  // namespace

MultiViewDataset normalize_views(const MultiViewDataset& ds) { return normalize_impl(ds, nullptr); }

MultiViewDataset normalize_views(const MultiViewDataset& ds, const AvailabilityMask& mask) {
  if (mask.n() != ds.n || mask.v() != ds.num_views())
    throw std::invalid_argument("normalize_views: mask shape mismatch");
  return normalize_impl(ds, &mask);
}

MultiViewDataset synth_gaussian(int n, int k, const std::vector<int>& dims, double sep,
                                double noise, std::uint64_t seed) {
  if (k < 2 || n < k) throw std::invalid_argument("synth_gaussian: need n >= k >= 2");
  if (dims.empty()) throw std::invalid_argument("synth_gaussian: need at least one view");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // near-uniform shared labels
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = i % k;
  std::shuffle(labels.begin(), labels.end(), rng);

  MultiViewDataset ds;
  ds.n = n;
  ds.labels = labels;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("synth_gaussian: dims must be positive");
    Eigen::MatrixXd centers(k, d);
    if (k <= d) {
      // Gram-Schmidt on random directions; orthonormal centers scaled by sep
      // give pairwise distance sep*sqrt(2).
      for (int c = 0; c < k; ++c) {
        Eigen::VectorXd v(d);
        for (int j = 0; j < d; ++j) v(j) = gauss(rng);
        for (int p = 0; p < c; ++p) v -= v.dot(centers.row(p).normalized()) * centers.row(p).normalized().transpose();
        while (v.norm() < 1e-8) {
          for (int j = 0; j < d; ++j) v(j) = gauss(rng);
        }
        centers.row(c) = (v.normalized() * sep).transpose();
      }
    } else {
      double radius = sep;
      for (int attempt = 0;; ++attempt) {
        for (int c = 0; c < k; ++c)
          for (int j = 0; j < d; ++j) centers(c, j) = gauss(rng) * radius;
        double min_dist = std::numeric_limits<double>::infinity();
        for (int a = 0; a < k; ++a)
          for (int b = a + 1; b < k; ++b)
            min_dist = std::min(min_dist, (centers.row(a) - centers.row(b)).norm());
        if (min_dist >= sep) break;
        if (attempt % 50 == 49) radius *= 1.5;
        if (attempt > 5000) throw std::runtime_error("synth_gaussian: center placement failed");
      }
    }
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j)
        x(i, j) = centers(labels[static_cast<size_t>(i)], j) + noise * gauss(rng);
    ds.views.push_back(std::move(x));
    ds.dims.push_back(d);
  }
  return ds;
}

}  // namespace hsacc::dataio
