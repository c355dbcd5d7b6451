#pragma once

// Researcher "raw data" export. Layout:
//
//   manifest.json                     format tag, capture list, sha256 per file
//   captures/<id>/meta.json           capture metadata document
//   captures/<id>/<angle>.<ext>       image bytes
//   audit/<id>.json                   timestamp corrections
//   users/<id>.json, projects/<id>.json, schemes/<id>.json
//   codes/<scheme>/<capture>.json, links/<project>.json
//
// An archive is held in memory as path → bytes and can be written as a
// directory tree or as a POSIX ustar stream.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "protobooth/backend/repository.hpp"
#include "protobooth/hash.hpp"

namespace protobooth::backend {

inline constexpr const char* kArchiveFormat = "protobooth-archive/1";

struct Archive {
  std::map<std::string, Bytes> files;

  void write_directory(const std::filesystem::path& dir) const;
  static Archive read_directory(const std::filesystem::path& dir);

  Bytes to_tar() const;
  static Archive from_tar(std::span<const unsigned char> tar);

  /// Reads a directory, or a tar file when `path` is a regular file.
  static Archive load(const std::filesystem::path& path);

  bool operator==(const Archive&) const = default;
};

/// Whole repository, or only a project's members, their blobs and the
/// documents that describe them. Throws Error(kNotFound) for an unknown
/// project.
Archive export_raw(const Repository& repo,
                   const std::optional<ProjectId>& project_id = std::nullopt);

/// Checks the manifest (every file listed, every hash matching, every
/// capture's images present) and merges the content. Existing documents
/// are kept, so importing the same archive twice is a no-op.
RestoreReport import_archive(Repository& repo, const Archive& archive);

}  // namespace protobooth::backend
