#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hsacc/trainer.hpp"

namespace hsacc::config {

// Flat key=value file with [section] headers; sections group keys for the
// reader, lookups are by key alone. `#` starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value);  // --set override
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string origin_;

  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
};

trainer::TrainConfig train_config_from(const KeyValueConfig& cfg);

// FNV-1a over file bytes, as a hex string; for run manifests.
std::string file_hash(const std::string& path);
std::string string_hash(const std::string& text);

}  // namespace hsacc::config
