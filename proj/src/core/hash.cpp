#include "protobooth/hash.hpp"

#include <openssl/sha.h>

namespace protobooth {

std::string sha256_hex(std::span<const unsigned char> data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(data.data(), data.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0x0f]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  return sha256_hex(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(data.data()), data.size()));
}

bool is_sha256_hex(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace protobooth
