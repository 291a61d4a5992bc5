// Flat `key = value` run configuration; repeated keys form lists.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraclab::config {

class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);  // replaces
  void append(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t require_seed() const;  // throws ConfigError when missing
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  // insertion-ordered view for embedding into reports
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fraclab::config
