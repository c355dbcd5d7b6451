#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace protobooth {

using Bytes = std::vector<unsigned char>;

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const unsigned char> data);
std::string sha256_hex(std::string_view data);

bool is_sha256_hex(std::string_view s);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_text(std::span<const unsigned char> b) {
  return std::string(b.begin(), b.end());
}

}  // namespace protobooth
