#include "fraclab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fraclab::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    cfg.append(key, value);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  std::erase_if(entries_, [&](const auto& kv) { return kv.first == key; });
  entries_.emplace_back(key, value);
}

void RunConfig::append(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

bool RunConfig::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first == key) return it->second;
  return fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const std::string s = get_string(key, "");
  if (s.empty()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key `" + key + "`: not a number: " + s);
  }
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  return static_cast<long>(v);
}

std::uint64_t RunConfig::require_seed() const {
  if (!has("seed")) throw ConfigError("config: `seed` is mandatory for randomized steps");
  return static_cast<std::uint64_t>(get_long("seed", 0));
}

std::vector<double> RunConfig::get_double_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
  std::vector<double> out;
  for (const auto& [k, v] : entries_) {
    if (k != key) continue;
    try {
      out.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw ConfigError("config key `" + key + "`: not a number: " + v);
    }
  }
  return out.empty() ? fallback : out;
}

std::vector<std::string> RunConfig::get_string_list(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out.push_back(v);
  return out;
}

}  // namespace fraclab::config
