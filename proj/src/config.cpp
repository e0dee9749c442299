#include "hsacc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hsacc::config {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": unterminated section");
      continue;  // sections are organizational only
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
    cfg.lines_[key] = lineno;
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  lines_[key] = 0;  // command-line override
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

void KeyValueConfig::fail(const std::string& key, const std::string& why) const {
  auto it = lines_.find(key);
  const std::string where =
      (it != lines_.end() && it->second > 0)
          ? origin_ + ":" + std::to_string(it->second)
          : std::string("--set");
  throw std::invalid_argument("config key '" + key + "' (" + where + "): " + why);
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(key, "not a number: '" + it->second + "'");
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(key, "not an integer: '" + it->second + "'");
  }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const std::uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(key, "not an unsigned integer: '" + it->second + "'");
  }
}

namespace {
template <typename T, typename F>
std::vector<T> parse_list(const std::string& text, F parse_one) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_one(item));
  return out;
}
}  // namespace

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_list<int>(it->second, [](const std::string& s) { return std::stoi(s); });
  } catch (const std::exception&) {
    fail(key, "not a comma-separated integer list: '" + it->second + "'");
  }
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_list<double>(it->second, [](const std::string& s) { return std::stod(s); });
  } catch (const std::exception&) {
    fail(key, "not a comma-separated number list: '" + it->second + "'");
  }
}

trainer::TrainConfig train_config_from(const KeyValueConfig& cfg) {
  trainer::TrainConfig tc;
  tc.lambdas[0] = cfg.get_double("lambda1", tc.lambdas[0]);
  tc.lambdas[1] = cfg.get_double("lambda2", tc.lambdas[1]);
  tc.lambdas[2] = cfg.get_double("lambda3", tc.lambdas[2]);
  tc.lambdas[3] = cfg.get_double("lambda4", tc.lambdas[3]);
  tc.epochs = cfg.get_int("epochs", tc.epochs);
  tc.warmup = cfg.get_int("warmup", tc.warmup);
  tc.lr = cfg.get_double("lr", tc.lr);
  tc.batch_size = cfg.get_int("batch_size", tc.batch_size);
  tc.latent_dim = cfg.get_int("latent_dim", tc.latent_dim);
  tc.encoder_hidden = cfg.get_int_list("encoder_hidden", tc.encoder_hidden);
  tc.inference_hidden = cfg.get_int_list("inference_hidden", tc.inference_hidden);
  const std::string kernel = cfg.get_string("kernel", "linear");
  if (kernel == "linear") {
    tc.kernel = alignment::Kernel::Linear;
  } else if (kernel == "rbf") {
    tc.kernel = alignment::Kernel::Rbf;
  } else {
    throw std::invalid_argument("config key 'kernel': expected linear or rbf, got '" + kernel + "'");
  }
  tc.seed = cfg.get_u64("seed", tc.seed);
  tc.k = cfg.get_int("k", tc.k);
  tc.restarts = cfg.get_int("restarts", tc.restarts);
  tc.eval_every = cfg.get_int("eval_every", tc.eval_every);
  tc.ckpt_every = cfg.get_int("ckpt_every", tc.ckpt_every);
  tc.clip_norm = cfg.get_double("clip_norm", tc.clip_norm);
  tc.validate();
  return tc;
}

std::string string_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("hash: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return string_hash(buf.str());
}

}  // namespace hsacc::config
