#include "protobooth/config.hpp"

#include <fstream>

#include "protobooth/error.hpp"

namespace protobooth {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kBadRequest,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot read config " + path.string());
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key,
                                   std::string fallback) const {
  return get(key).value_or(std::move(fallback));
}

long long KeyValueConfig::get_int_or(const std::string& key,
                                     long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    return std::stoll(*v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kBadRequest, "config key " + key + " is not an integer");
  }
}

}  // namespace protobooth
