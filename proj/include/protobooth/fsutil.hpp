#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "protobooth/hash.hpp"

namespace protobooth {

/// Writes via a sibling temp file, fsync and rename, so readers see either
/// the old content or the new one. Throws Error(kStorage) on failure.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const unsigned char> data);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::optional<Bytes> read_file(const std::filesystem::path& path);

/// fsync on a directory so a rename inside it is durable.
void sync_directory(const std::filesystem::path& dir);

/// Unique name for a temporary sibling of `target`.
std::filesystem::path temp_sibling(const std::filesystem::path& target);

}  // namespace protobooth
