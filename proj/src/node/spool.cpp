#include "protobooth/node/spool.hpp"

#include <algorithm>
#include <random>

#include "protobooth/error.hpp"
#include "protobooth/fsutil.hpp"
#include "protobooth/serialize.hpp"

namespace fs = std::filesystem;

namespace protobooth::node {

namespace {

void sort_oldest_first(std::vector<SpoolEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const SpoolEntry& a, const SpoolEntry& b) {
              return chronologically_before(a.record, b.record);
            });
}

std::string image_file_name(ViewAngle angle, const ImageRef& ref) {
  return std::string(to_string(angle)) + "." +
         std::string(extension_for(ref.media_type));
}

std::string meta_document(const SpoolEntry& e) {
  return canonical_text(Json{{"record", e.record},
                             {"attempt_count", e.attempt_count},
                             {"next_attempt_at", e.next_attempt_at}});
}

}  // namespace

void MemorySpool::put(const SpoolEntry& entry) {
  std::lock_guard lock(mu_);
  entries_.try_emplace(entry.record.capture_id, entry);
}

std::vector<SpoolEntry> MemorySpool::entries() const {
  std::vector<SpoolEntry> out;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, e] : entries_) out.push_back(e);
  }
  sort_oldest_first(out);
  return out;
}

void MemorySpool::reschedule(const CaptureId& id, int attempt_count,
                             Timestamp next_attempt_at) {
  std::lock_guard lock(mu_);
  if (auto it = entries_.find(id); it != entries_.end()) {
    it->second.attempt_count = attempt_count;
    it->second.next_attempt_at = next_attempt_at;
  }
}

void MemorySpool::remove(const CaptureId& id) {
  std::lock_guard lock(mu_);
  entries_.erase(id);
}

std::size_t MemorySpool::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::uint64_t MemorySpool::next_counter() {
  std::lock_guard lock(mu_);
  return ++counter_;
}

DirectorySpool::DirectorySpool(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw Error(ErrorCode::kStorage, "cannot use spool directory " + dir_.string());
  }
  // Leftovers from an interrupted put() or remove().
  for (const auto& item : fs::directory_iterator(dir_)) {
    const auto name = item.path().filename().string();
    if (name.starts_with(".stage-") || name.starts_with(".trash-") ||
        name.starts_with(".tmp-")) {
      fs::remove_all(item.path(), ec);
    }
  }
}

void DirectorySpool::put(const SpoolEntry& entry) {
  const auto& id = entry.record.capture_id;
  if (id.empty() || id.find('/') != std::string::npos || id.starts_with(".")) {
    throw Error(ErrorCode::kValidation, "capture id not usable as a spool key: " + id);
  }
  std::lock_guard lock(mu_);
  const fs::path target = dir_ / id;
  if (fs::exists(target)) return;

  thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path stage = dir_ / (".stage-" + id + "-" + std::to_string(rng()));
  try {
    fs::create_directories(stage);
    for (const auto& [angle, ref] : entry.record.views) {
      auto it = entry.images.find(angle);
      if (it == entry.images.end()) {
        throw Error(ErrorCode::kValidation,
                    "missing image for " + std::string(to_string(angle)));
      }
      write_file_atomic(stage / image_file_name(angle, ref), it->second);
    }
    write_file_atomic(stage / "meta.json", meta_document(entry));
    sync_directory(stage);
    fs::rename(stage, target);
    sync_directory(dir_);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw Error(ErrorCode::kStorage, std::string("spool write failed: ") + e.what());
  } catch (...) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw;
  }
}

std::optional<SpoolEntry> DirectorySpool::load(const fs::path& entry_dir) const {
  auto meta = read_file(entry_dir / "meta.json");
  if (!meta) return std::nullopt;
  try {
    const Json j = Json::parse(meta->begin(), meta->end());
    SpoolEntry e;
    e.record = j.at("record").get<CaptureRecord>();
    e.attempt_count = j.value("attempt_count", 0);
    e.next_attempt_at = j.value("next_attempt_at", Timestamp{0});
    for (const auto& [angle, ref] : e.record.views) {
      auto bytes = read_file(entry_dir / image_file_name(angle, ref));
      if (!bytes) return std::nullopt;
      e.images.emplace(angle, std::move(*bytes));
    }
    return e;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<SpoolEntry> DirectorySpool::entries() const {
  std::vector<SpoolEntry> out;
  {
    std::lock_guard lock(mu_);
    for (const auto& item : fs::directory_iterator(dir_)) {
      if (!item.is_directory()) continue;
      if (item.path().filename().string().starts_with(".")) continue;
      if (auto e = load(item.path())) out.push_back(std::move(*e));
    }
  }
  sort_oldest_first(out);
  return out;
}

void DirectorySpool::reschedule(const CaptureId& id, int attempt_count,
                                Timestamp next_attempt_at) {
  std::lock_guard lock(mu_);
  auto e = load(dir_ / id);
  if (!e) return;
  e->attempt_count = attempt_count;
  e->next_attempt_at = next_attempt_at;
  write_file_atomic(dir_ / id / "meta.json", meta_document(*e));
}

void DirectorySpool::remove(const CaptureId& id) {
  std::lock_guard lock(mu_);
  const fs::path target = dir_ / id;
  if (!fs::exists(target)) return;
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path trash = dir_ / (".trash-" + id + "-" + std::to_string(rng()));
  std::error_code ec;
  fs::rename(target, trash, ec);
  if (ec) throw Error(ErrorCode::kStorage, "cannot remove spool entry " + id);
  sync_directory(dir_);
  fs::remove_all(trash, ec);
}

std::size_t DirectorySpool::size() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& item : fs::directory_iterator(dir_)) {
    if (item.is_directory() && !item.path().filename().string().starts_with("."))
      ++n;
  }
  return n;
}

std::uint64_t DirectorySpool::next_counter() {
  std::lock_guard lock(mu_);
  const fs::path file = dir_ / "counter";
  std::uint64_t value = 0;
  if (auto bytes = read_file(file)) {
    try {
      value = std::stoull(to_text(*bytes));
    } catch (const std::exception&) {
      value = 0;
    }
  }
  ++value;
  write_file_atomic(file, std::to_string(value));
  return value;
}

}  // namespace protobooth::node
