#pragma once

// Storage behind the repository: a content-addressed blob store for image
// bytes and a document store for metadata. File-backed implementations are
// the default; in-memory ones serve tests and snapshots.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protobooth/hash.hpp"

namespace protobooth::backend {

class BlobStore {
 public:
  virtual ~BlobStore() = default;
  /// Stores bytes under their SHA-256; returns the digest. Idempotent.
  virtual std::string put(std::span<const unsigned char> bytes) = 0;
  virtual std::optional<Bytes> get(const std::string& hash) const = 0;
  virtual bool contains(const std::string& hash) const = 0;
  virtual void remove(const std::string& hash) = 0;
  virtual std::vector<std::string> list() const = 0;
};

class DocumentStore {
 public:
  virtual ~DocumentStore() = default;
  virtual void put(const std::string& collection, const std::string& key,
                   const std::string& text) = 0;
  virtual std::optional<std::string> get(const std::string& collection,
                                         const std::string& key) const = 0;
  virtual void remove(const std::string& collection, const std::string& key) = 0;
  virtual std::vector<std::string> keys(const std::string& collection) const = 0;
};

class MemoryBlobStore final : public BlobStore {
 public:
  std::string put(std::span<const unsigned char> bytes) override;
  std::optional<Bytes> get(const std::string& hash) const override;
  bool contains(const std::string& hash) const override;
  void remove(const std::string& hash) override;
  std::vector<std::string> list() const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Bytes> blobs_;
};

/// `<root>/<first two hex chars>/<digest>`.
class FileBlobStore final : public BlobStore {
 public:
  explicit FileBlobStore(std::filesystem::path root);
  std::string put(std::span<const unsigned char> bytes) override;
  std::optional<Bytes> get(const std::string& hash) const override;
  bool contains(const std::string& hash) const override;
  void remove(const std::string& hash) override;
  std::vector<std::string> list() const override;

  std::filesystem::path path_for(const std::string& hash) const;

 private:
  std::filesystem::path root_;
};

class MemoryDocumentStore final : public DocumentStore {
 public:
  void put(const std::string& collection, const std::string& key,
           const std::string& text) override;
  std::optional<std::string> get(const std::string& collection,
                                 const std::string& key) const override;
  void remove(const std::string& collection, const std::string& key) override;
  std::vector<std::string> keys(const std::string& collection) const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::map<std::string, std::string>> docs_;
};

/// `<root>/<collection>/<escaped key>.json`. Keys are percent-escaped so any
/// id maps to a single file name.
class FileDocumentStore final : public DocumentStore {
 public:
  explicit FileDocumentStore(std::filesystem::path root);
  void put(const std::string& collection, const std::string& key,
           const std::string& text) override;
  std::optional<std::string> get(const std::string& collection,
                                 const std::string& key) const override;
  void remove(const std::string& collection, const std::string& key) override;
  std::vector<std::string> keys(const std::string& collection) const override;

  std::filesystem::path path_for(const std::string& collection,
                                 const std::string& key) const;

 private:
  std::filesystem::path root_;
};

std::string escape_key(std::string_view key);
std::string unescape_key(std::string_view name);

}  // namespace protobooth::backend
