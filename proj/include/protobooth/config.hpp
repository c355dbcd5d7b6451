#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>

namespace protobooth {

/// `key = value` lines; `#` starts a comment. Later keys override earlier.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace protobooth
