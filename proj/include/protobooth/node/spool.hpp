#pragma once

// Durable outbox for captures that have not yet been acknowledged by the
// backend. An entry is complete (record plus all seven images) or absent.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "protobooth/ingest.hpp"
#include "protobooth/model.hpp"

namespace protobooth::node {

struct SpoolEntry {
  CaptureRecord record;
  ImagePayloads images;
  int attempt_count = 0;
  Timestamp next_attempt_at = 0;
};

class Spool {
 public:
  virtual ~Spool() = default;

  /// Durable when it returns. Throws Error(kStorage) otherwise.
  virtual void put(const SpoolEntry& entry) = 0;
  /// Oldest first (canonical capture order).
  virtual std::vector<SpoolEntry> entries() const = 0;
  virtual void reschedule(const CaptureId& id, int attempt_count,
                          Timestamp next_attempt_at) = 0;
  virtual void remove(const CaptureId& id) = 0;
  virtual std::size_t size() const = 0;
  /// Monotonic per-booth sequence number, persisted with the spool.
  virtual std::uint64_t next_counter() = 0;
};

class MemorySpool final : public Spool {
 public:
  void put(const SpoolEntry& entry) override;
  std::vector<SpoolEntry> entries() const override;
  void reschedule(const CaptureId& id, int attempt_count,
                  Timestamp next_attempt_at) override;
  void remove(const CaptureId& id) override;
  std::size_t size() const override;
  std::uint64_t next_counter() override;

 private:
  mutable std::mutex mu_;
  std::map<CaptureId, SpoolEntry> entries_;
  std::uint64_t counter_ = 0;
};

/// One directory per capture: `<capture_id>/meta.json` plus
/// `<angle>.<ext>` for each view. Entries are staged in a hidden directory
/// and renamed into place, so a crash never leaves a partial entry visible.
class DirectorySpool final : public Spool {
 public:
  explicit DirectorySpool(std::filesystem::path dir);

  void put(const SpoolEntry& entry) override;
  std::vector<SpoolEntry> entries() const override;
  void reschedule(const CaptureId& id, int attempt_count,
                  Timestamp next_attempt_at) override;
  void remove(const CaptureId& id) override;
  std::size_t size() const override;
  std::uint64_t next_counter() override;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::optional<SpoolEntry> load(const std::filesystem::path& entry_dir) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

}  // namespace protobooth::node
