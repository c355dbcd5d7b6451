#include "protobooth/backend/stores.hpp"

#include <algorithm>

#include "protobooth/error.hpp"
#include "protobooth/fsutil.hpp"

namespace fs = std::filesystem;

namespace protobooth::backend {

std::string escape_key(std::string_view key) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : key) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                      (c == '.' && !out.empty());
    if (safe) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0f]);
    }
  }
  return out;
}

std::string unescape_key(std::string_view name) {
  auto nibble = [](char c) {
    return c <= '9' ? c - '0' : (c & ~0x20) - 'A' + 10;
  };
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && i + 2 < name.size()) {
      out.push_back(static_cast<char>(nibble(name[i + 1]) * 16 + nibble(name[i + 2])));
      i += 2;
    } else {
      out.push_back(name[i]);
    }
  }
  return out;
}

std::string MemoryBlobStore::put(std::span<const unsigned char> bytes) {
  std::string hash = sha256_hex(bytes);
  std::lock_guard lock(mu_);
  blobs_.try_emplace(hash, bytes.begin(), bytes.end());
  return hash;
}

std::optional<Bytes> MemoryBlobStore::get(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = blobs_.find(hash);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

bool MemoryBlobStore::contains(const std::string& hash) const {
  std::lock_guard lock(mu_);
  return blobs_.contains(hash);
}

void MemoryBlobStore::remove(const std::string& hash) {
  std::lock_guard lock(mu_);
  blobs_.erase(hash);
}

std::vector<std::string> MemoryBlobStore::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [h, b] : blobs_) out.push_back(h);
  return out;
}

FileBlobStore::FileBlobStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (!fs::is_directory(root_))
    throw Error(ErrorCode::kStorage, "cannot use blob directory " + root_.string());
}

fs::path FileBlobStore::path_for(const std::string& hash) const {
  if (!is_sha256_hex(hash))
    throw Error(ErrorCode::kBadRequest, "not a content hash: " + hash);
  return root_ / hash.substr(0, 2) / hash;
}

std::string FileBlobStore::put(std::span<const unsigned char> bytes) {
  std::string hash = sha256_hex(bytes);
  const fs::path p = path_for(hash);
  if (!fs::exists(p)) write_file_atomic(p, bytes);
  return hash;
}

std::optional<Bytes> FileBlobStore::get(const std::string& hash) const {
  if (!is_sha256_hex(hash)) return std::nullopt;
  return read_file(path_for(hash));
}

bool FileBlobStore::contains(const std::string& hash) const {
  return is_sha256_hex(hash) && fs::exists(path_for(hash));
}

void FileBlobStore::remove(const std::string& hash) {
  std::error_code ec;
  if (is_sha256_hex(hash)) fs::remove(path_for(hash), ec);
}

std::vector<std::string> FileBlobStore::list() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (is_sha256_hex(name)) out.push_back(std::move(name));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void MemoryDocumentStore::put(const std::string& collection,
                              const std::string& key, const std::string& text) {
  std::lock_guard lock(mu_);
  docs_[collection][key] = text;
}

std::optional<std::string> MemoryDocumentStore::get(const std::string& collection,
                                                    const std::string& key) const {
  std::lock_guard lock(mu_);
  auto c = docs_.find(collection);
  if (c == docs_.end()) return std::nullopt;
  auto it = c->second.find(key);
  if (it == c->second.end()) return std::nullopt;
  return it->second;
}

void MemoryDocumentStore::remove(const std::string& collection,
                                 const std::string& key) {
  std::lock_guard lock(mu_);
  if (auto c = docs_.find(collection); c != docs_.end()) c->second.erase(key);
}

std::vector<std::string> MemoryDocumentStore::keys(const std::string& collection) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  if (auto c = docs_.find(collection); c != docs_.end()) {
    for (const auto& [k, v] : c->second) out.push_back(k);
  }
  return out;
}

FileDocumentStore::FileDocumentStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (!fs::is_directory(root_))
    throw Error(ErrorCode::kStorage, "cannot use document directory " + root_.string());
}

fs::path FileDocumentStore::path_for(const std::string& collection,
                                     const std::string& key) const {
  return root_ / escape_key(collection) / (escape_key(key) + ".json");
}

void FileDocumentStore::put(const std::string& collection, const std::string& key,
                            const std::string& text) {
  write_file_atomic(path_for(collection, key), text);
}

std::optional<std::string> FileDocumentStore::get(const std::string& collection,
                                                  const std::string& key) const {
  auto bytes = read_file(path_for(collection, key));
  if (!bytes) return std::nullopt;
  return to_text(*bytes);
}

void FileDocumentStore::remove(const std::string& collection,
                               const std::string& key) {
  std::error_code ec;
  fs::remove(path_for(collection, key), ec);
}

std::vector<std::string> FileDocumentStore::keys(const std::string& collection) const {
  std::vector<std::string> out;
  const fs::path dir = root_ / escape_key(collection);
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.starts_with(".") || !name.ends_with(".json"))
      continue;
    out.push_back(unescape_key(name.substr(0, name.size() - 5)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace protobooth::backend
