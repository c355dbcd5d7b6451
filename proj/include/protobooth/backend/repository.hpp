#pragma once

// Ingestion and curation store. Metadata documents and image blobs live in
// separate stores; a capture becomes visible only after all seven blobs are
// durable. All public methods are thread-safe.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "protobooth/backend/stores.hpp"
#include "protobooth/ingest.hpp"
#include "protobooth/link_graph.hpp"
#include "protobooth/model.hpp"
#include "protobooth/schemes.hpp"

namespace protobooth::backend {

// Document collection names; also the top-level archive directories.
inline constexpr const char* kCaptures = "captures";
inline constexpr const char* kUsers = "users";
inline constexpr const char* kProjects = "projects";
inline constexpr const char* kSchemes = "schemes";
inline constexpr const char* kCodes = "codes";
inline constexpr const char* kLinks = "links";
inline constexpr const char* kAudit = "audit";

struct CaptureFilter {
  std::optional<UserId> user;
  std::optional<BoothId> booth;
  std::optional<ProjectId> project;
  std::optional<Timestamp> from;  // inclusive
  std::optional<Timestamp> to;    // inclusive
};

struct TimestampCorrection {
  Timestamp old_timestamp = 0;
  Timestamp new_timestamp = 0;
  std::string note;
  Timestamp recorded_at = 0;

  bool operator==(const TimestampCorrection&) const = default;
};

struct Violation {
  std::string kind;     // e.g. "missing_blob", "chronology"
  std::string subject;  // id of the offending entity
  std::string detail;
};

struct IntegrityReport {
  std::size_t captures_checked = 0;
  std::size_t blobs_checked = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Every stored document and blob, for deep-equality checks.
struct RepositorySnapshot {
  std::map<std::string, std::string> documents;  // "<collection>/<key>" → text
  std::map<std::string, Bytes> blobs;
  bool operator==(const RepositorySnapshot&) const = default;
};

/// Raw content handed to Repository::restore.
struct RestoreSet {
  std::map<std::string, std::map<std::string, std::string>> documents;
  std::vector<Bytes> blobs;
};

struct RestoreReport {
  std::size_t documents_written = 0;
  std::size_t documents_skipped = 0;  // already present, identical
  std::size_t conflicts = 0;          // already present, different; kept
  std::size_t blobs_written = 0;
};

class Repository {
 public:
  using WallClock = std::function<Timestamp()>;

  Repository(std::unique_ptr<DocumentStore> documents,
             std::unique_ptr<BlobStore> blobs, WallClock wall_clock = {});

  /// File-backed repository under `dir` (`dir/docs`, `dir/blobs`).
  static std::unique_ptr<Repository> open(const std::filesystem::path& dir,
                                          WallClock wall_clock = {});
  static std::unique_ptr<Repository> in_memory(WallClock wall_clock = {});

  // Ingestion.
  IngestReceipt ingest_capture(const CaptureRecord& record,
                               const ImagePayloads& images);

  // Users and cards.
  User create_user(const std::string& display_name,
                   std::optional<UserId> user_id = std::nullopt);
  User register_card(const CardId& card_id, const UserId& user_id);
  std::optional<User> user(const UserId& id) const;
  std::optional<User> user_for_card(const CardId& card_id) const;
  std::vector<User> users() const;
  /// Display name of the card's owner, or "unknown card <id>".
  std::string capturer(const CaptureRecord& record) const;

  // Projects.
  Project create_project(const std::string& title, const std::string& description,
                         const UserId& creator,
                         std::optional<ProjectId> project_id = std::nullopt);
  Project add_contributor(const ProjectId& project_id, const UserId& user_id);
  Project assign_to_project(const ProjectId& project_id,
                            const std::vector<CaptureId>& capture_ids);
  std::optional<Project> project(const ProjectId& id) const;
  std::vector<Project> projects() const;

  // Curation.
  /// Fields present in `patch` replace stored ones; absent fields are kept.
  CaptureRecord annotate(const CaptureId& id, const Annotation& patch);
  CaptureRecord correct_timestamp(const CaptureId& id, Timestamp new_timestamp,
                                  const std::string& note);
  std::vector<TimestampCorrection> audit_log(const CaptureId& id) const;

  // Coding.
  std::vector<CodingScheme> schemes() const;
  std::optional<CodingScheme> scheme(const SchemeId& id) const;
  CodingScheme put_scheme(const CodingScheme& scheme);
  CodeAssignment set_codes(const CaptureId& capture_id, const SchemeId& scheme_id,
                           const std::vector<std::string>& categories);
  std::optional<CodeAssignment> assignment(const CaptureId& capture_id,
                                           const SchemeId& scheme_id) const;
  std::vector<CodeAssignment> assignments(const SchemeId& scheme_id) const;

  // Link graphs.
  LinkGraph links(const ProjectId& project_id) const;
  /// Replaces the whole graph after validating it against the members.
  LinkGraph put_links(const ProjectId& project_id, LinkGraph graph);
  LinkGraph add_link(const ProjectId& project_id, const CaptureId& from,
                     const CaptureId& to);
  LinkGraph set_node_class(const ProjectId& project_id, const CaptureId& id,
                           NodeClass cls);

  // Queries.
  std::optional<CaptureRecord> capture(const CaptureId& id) const;
  /// Conjunctive filter; result in canonical order.
  std::vector<CaptureRecord> query_captures(const CaptureFilter& filter = {}) const;
  std::optional<Bytes> view_bytes(const CaptureId& id, ViewAngle angle) const;
  std::size_t capture_count() const;

  // Integrity.
  IntegrityReport verify() const;
  /// Removes blobs no capture references. Returns how many were removed.
  std::size_t collect_garbage();
  RepositorySnapshot snapshot() const;

  // Raw access for export/import.
  std::vector<std::pair<std::string, std::string>> raw_documents(
      const std::string& collection) const;
  std::optional<Bytes> blob(const std::string& hash) const;
  RestoreReport restore(const RestoreSet& content);

 private:
  void load();
  Timestamp wall_now() const;
  ChronologicalIndex member_index_locked(const Project& project,
                                         const std::map<CaptureId, Timestamp>&
                                             overrides = {}) const;
  void put_document(const std::string& collection, const std::string& key,
                    const std::string& text);
  const Project& require_project(const ProjectId& id) const;
  const CaptureRecord& require_capture(const CaptureId& id) const;

  std::unique_ptr<DocumentStore> documents_;
  std::unique_ptr<BlobStore> blobs_;
  WallClock wall_clock_;

  mutable std::shared_mutex mu_;
  std::map<CaptureId, CaptureRecord> captures_;
  std::map<UserId, User> users_;
  std::map<CardId, UserId> card_owner_;
  std::map<ProjectId, Project> projects_;
  std::map<SchemeId, CodingScheme> custom_schemes_;
  std::map<std::pair<SchemeId, CaptureId>, CodeAssignment> codes_;
  std::map<ProjectId, LinkGraph> links_;
  std::map<CaptureId, std::vector<TimestampCorrection>> audit_;
  std::vector<Violation> load_errors_;
};

void to_json(Json& j, const TimestampCorrection& v);
void from_json(const Json& j, TimestampCorrection& v);
void to_json(Json& j, const Violation& v);
void to_json(Json& j, const IntegrityReport& v);
void to_json(Json& j, const RestoreReport& v);

}  // namespace protobooth::backend
