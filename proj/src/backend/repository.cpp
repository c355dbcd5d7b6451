#include "protobooth/backend/repository.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <mutex>
#include <set>

#include "protobooth/error.hpp"
#include "protobooth/serialize.hpp"

namespace fs = std::filesystem;

namespace protobooth::backend {

void to_json(Json& j, const TimestampCorrection& v) {
  j = Json{{"old_timestamp", v.old_timestamp},
           {"new_timestamp", v.new_timestamp},
           {"note", v.note},
           {"recorded_at", v.recorded_at}};
}

void from_json(const Json& j, TimestampCorrection& v) {
  j.at("old_timestamp").get_to(v.old_timestamp);
  j.at("new_timestamp").get_to(v.new_timestamp);
  v.note = j.value("note", "");
  v.recorded_at = j.value("recorded_at", Timestamp{0});
}

void to_json(Json& j, const Violation& v) {
  j = Json{{"kind", v.kind}, {"subject", v.subject}, {"detail", v.detail}};
}

void to_json(Json& j, const IntegrityReport& v) {
  j = Json{{"ok", v.ok()},
           {"captures_checked", v.captures_checked},
           {"blobs_checked", v.blobs_checked},
           {"violations", v.violations}};
}

void to_json(Json& j, const RestoreReport& v) {
  j = Json{{"documents_written", v.documents_written},
           {"documents_skipped", v.documents_skipped},
           {"conflicts", v.conflicts},
           {"blobs_written", v.blobs_written}};
}

namespace {

const char* const kAllCollections[] = {kCaptures, kUsers, kProjects, kSchemes,
                                       kCodes,    kLinks, kAudit};

std::string codes_key(const SchemeId& scheme, const CaptureId& capture) {
  return scheme + "/" + capture;
}

bool is_builtin(const SchemeId& id) {
  for (const auto& s : builtin_schemes())
    if (s.scheme_id == id) return true;
  return false;
}

std::string next_id(const char* prefix, std::size_t existing,
                    const auto& taken) {
  for (std::size_t n = existing + 1;; ++n) {
    std::string id = fmt::format("{}-{:04d}", prefix, n);
    if (!taken.contains(id)) return id;
  }
}

void require_safe(const std::string& id, const char* what) {
  if (!is_safe_id(id)) {
    throw Error(ErrorCode::kBadRequest, std::string(what) + " id is not usable: '" + id + "'");
  }
}

}  // namespace

Repository::Repository(std::unique_ptr<DocumentStore> documents,
                       std::unique_ptr<BlobStore> blobs, WallClock wall_clock)
    : documents_(std::move(documents)),
      blobs_(std::move(blobs)),
      wall_clock_(std::move(wall_clock)) {
  load();
}

std::unique_ptr<Repository> Repository::open(const fs::path& dir,
                                             WallClock wall_clock) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kStorage, "cannot use data directory " + dir.string());
  }
  return std::make_unique<Repository>(
      std::make_unique<FileDocumentStore>(dir / "docs"),
      std::make_unique<FileBlobStore>(dir / "blobs"), std::move(wall_clock));
}

std::unique_ptr<Repository> Repository::in_memory(WallClock wall_clock) {
  return std::make_unique<Repository>(std::make_unique<MemoryDocumentStore>(),
                                      std::make_unique<MemoryBlobStore>(),
                                      std::move(wall_clock));
}

Timestamp Repository::wall_now() const {
  if (wall_clock_) return wall_clock_();
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

void Repository::load() {
  captures_.clear();
  users_.clear();
  card_owner_.clear();
  projects_.clear();
  custom_schemes_.clear();
  codes_.clear();
  links_.clear();
  audit_.clear();
  load_errors_.clear();

  auto each = [&](const char* collection, auto&& fn) {
    for (const auto& key : documents_->keys(collection)) {
      auto text = documents_->get(collection, key);
      if (!text) continue;
      try {
        fn(key, Json::parse(*text));
      } catch (const std::exception& e) {
        load_errors_.push_back(
            {"unreadable_document", std::string(collection) + "/" + key, e.what()});
      }
    }
  };
  each(kCaptures, [&](const std::string& key, const Json& j) {
    auto rec = j.get<CaptureRecord>();
    if (rec.capture_id != key)
      throw std::runtime_error("document key does not match capture_id");
    captures_.emplace(key, std::move(rec));
  });
  each(kUsers, [&](const std::string& key, const Json& j) {
    auto user = j.get<User>();
    for (const auto& card : user.card_ids) {
      auto [it, inserted] = card_owner_.emplace(card, user.user_id);
      if (!inserted) {
        load_errors_.push_back({"card_conflict", card,
                                "bound to " + it->second + " and " + user.user_id});
      }
    }
    users_.emplace(key, std::move(user));
  });
  each(kProjects, [&](const std::string& key, const Json& j) {
    projects_.emplace(key, j.get<Project>());
  });
  each(kSchemes, [&](const std::string& key, const Json& j) {
    custom_schemes_.emplace(key, j.get<CodingScheme>());
  });
  each(kCodes, [&](const std::string&, const Json& j) {
    auto a = j.get<CodeAssignment>();
    codes_.emplace(std::make_pair(a.scheme_id, a.capture_id), std::move(a));
  });
  each(kLinks, [&](const std::string& key, const Json& j) {
    auto g = j.get<LinkGraph>();
    g.project_id = key;
    links_.emplace(key, std::move(g));
  });
  each(kAudit, [&](const std::string& key, const Json& j) {
    audit_.emplace(key, j.get<std::vector<TimestampCorrection>>());
  });
}

void Repository::put_document(const std::string& collection,
                              const std::string& key, const std::string& text) {
  documents_->put(collection, key, text);
}

const Project& Repository::require_project(const ProjectId& id) const {
  auto it = projects_.find(id);
  if (it == projects_.end())
    throw Error(ErrorCode::kNotFound, "unknown project " + id, {id});
  return it->second;
}

const CaptureRecord& Repository::require_capture(const CaptureId& id) const {
  auto it = captures_.find(id);
  if (it == captures_.end())
    throw Error(ErrorCode::kNotFound, "unknown capture " + id, {id});
  return it->second;
}

ChronologicalIndex Repository::member_index_locked(
    const Project& project,
    const std::map<CaptureId, Timestamp>& overrides) const {
  std::vector<CaptureRecord> members;
  for (const auto& id : project.members) {
    auto it = captures_.find(id);
    if (it == captures_.end()) continue;
    CaptureRecord r = it->second;
    if (auto o = overrides.find(id); o != overrides.end()) r.timestamp = o->second;
    members.push_back(std::move(r));
  }
  return ChronologicalIndex(members);
}

// ---------------------------------------------------------------------------
// Ingestion

IngestReceipt Repository::ingest_capture(const CaptureRecord& record,
                                         const ImagePayloads& images) {
  auto violations = validate_capture(record);
  for (ViewAngle a : kAllAngles) {
    if (!images.contains(a))
      violations.push_back("image missing: " + std::string(to_string(a)));
  }
  if (!violations.empty()) {
    throw Error(ErrorCode::kValidation, "capture rejected", std::move(violations));
  }
  for (const auto& [angle, ref] : record.views) {
    const Bytes& bytes = images.at(angle);
    if (static_cast<std::int64_t>(bytes.size()) != ref.byte_length ||
        sha256_hex(bytes) != ref.content_hash) {
      throw Error(ErrorCode::kHashMismatch, "payload does not match manifest",
                  {std::string(to_string(angle))});
    }
  }

  std::unique_lock lock(mu_);
  if (captures_.contains(record.capture_id)) {
    return {record.capture_id, false, static_cast<int>(kAllAngles.size())};
  }

  std::vector<std::string> written;
  try {
    for (const auto& [angle, ref] : record.views) {
      if (blobs_->contains(ref.content_hash)) continue;
      blobs_->put(images.at(angle));
      written.push_back(ref.content_hash);
    }
    put_document(kCaptures, record.capture_id, to_document(record));
  } catch (const std::exception& e) {
    for (const auto& hash : written) {
      try {
        blobs_->remove(hash);
      } catch (...) {
        // Left for collect_garbage().
      }
    }
    throw Error(ErrorCode::kStorage, std::string("ingest failed: ") + e.what());
  }
  captures_.emplace(record.capture_id, record);
  return {record.capture_id, true, static_cast<int>(record.views.size())};
}

// ---------------------------------------------------------------------------
// Users

User Repository::create_user(const std::string& display_name,
                             std::optional<UserId> user_id) {
  std::unique_lock lock(mu_);
  User user;
  user.user_id = user_id ? *user_id : next_id("user", users_.size(), users_);
  require_safe(user.user_id, "user");
  if (users_.contains(user.user_id))
    throw Error(ErrorCode::kConflict, "user already exists: " + user.user_id);
  user.display_name = display_name;
  put_document(kUsers, user.user_id, to_document(user));
  users_.emplace(user.user_id, user);
  return user;
}

User Repository::register_card(const CardId& card_id, const UserId& user_id) {
  std::unique_lock lock(mu_);
  if (card_id.empty()) throw Error(ErrorCode::kBadRequest, "card id empty");
  auto it = users_.find(user_id);
  if (it == users_.end())
    throw Error(ErrorCode::kNotFound, "unknown user " + user_id, {user_id});
  if (auto owner = card_owner_.find(card_id); owner != card_owner_.end()) {
    if (owner->second != user_id) {
      throw Error(ErrorCode::kConflict,
                  "card " + card_id + " is already bound to " + owner->second,
                  {card_id});
    }
    return it->second;
  }
  User updated = it->second;
  updated.card_ids.insert(card_id);
  put_document(kUsers, user_id, to_document(updated));
  it->second = updated;
  card_owner_[card_id] = user_id;
  return updated;
}

std::optional<User> Repository::user(const UserId& id) const {
  std::shared_lock lock(mu_);
  auto it = users_.find(id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

std::optional<User> Repository::user_for_card(const CardId& card_id) const {
  std::shared_lock lock(mu_);
  auto owner = card_owner_.find(card_id);
  if (owner == card_owner_.end()) return std::nullopt;
  return users_.at(owner->second);
}

std::vector<User> Repository::users() const {
  std::shared_lock lock(mu_);
  std::vector<User> out;
  for (const auto& [id, u] : users_) out.push_back(u);
  return out;
}

std::string Repository::capturer(const CaptureRecord& record) const {
  auto owner = user_for_card(record.card_id);
  if (!owner) return "unknown card " + record.card_id;
  return owner->display_name.empty() ? owner->user_id : owner->display_name;
}

// ---------------------------------------------------------------------------
// Projects

Project Repository::create_project(const std::string& title,
                                   const std::string& description,
                                   const UserId& creator,
                                   std::optional<ProjectId> project_id) {
  std::unique_lock lock(mu_);
  if (!users_.contains(creator))
    throw Error(ErrorCode::kNotFound, "unknown user " + creator, {creator});
  Project p;
  p.project_id =
      project_id ? *project_id : next_id("project", projects_.size(), projects_);
  require_safe(p.project_id, "project");
  if (projects_.contains(p.project_id))
    throw Error(ErrorCode::kConflict, "project already exists: " + p.project_id);
  p.title = title;
  p.description = description;
  p.contributors.insert(creator);
  put_document(kProjects, p.project_id, to_document(p));
  projects_.emplace(p.project_id, p);
  return p;
}

Project Repository::add_contributor(const ProjectId& project_id,
                                    const UserId& user_id) {
  std::unique_lock lock(mu_);
  Project p = require_project(project_id);
  if (!users_.contains(user_id))
    throw Error(ErrorCode::kNotFound, "unknown user " + user_id, {user_id});
  if (p.contributors.insert(user_id).second) {
    put_document(kProjects, project_id, to_document(p));
    projects_[project_id] = p;
  }
  return p;
}

Project Repository::assign_to_project(const ProjectId& project_id,
                                      const std::vector<CaptureId>& capture_ids) {
  std::unique_lock lock(mu_);
  Project p = require_project(project_id);
  std::vector<std::string> missing;
  for (const auto& id : capture_ids)
    if (!captures_.contains(id)) missing.push_back(id);
  if (!missing.empty())
    throw Error(ErrorCode::kNotFound, "unknown capture", std::move(missing));
  const std::size_t before = p.members.size();
  p.members.insert(capture_ids.begin(), capture_ids.end());
  if (p.members.size() != before) {
    put_document(kProjects, project_id, to_document(p));
    projects_[project_id] = p;
  }
  return p;
}

std::optional<Project> Repository::project(const ProjectId& id) const {
  std::shared_lock lock(mu_);
  auto it = projects_.find(id);
  if (it == projects_.end()) return std::nullopt;
  return it->second;
}

std::vector<Project> Repository::projects() const {
  std::shared_lock lock(mu_);
  std::vector<Project> out;
  for (const auto& [id, p] : projects_) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Curation

CaptureRecord Repository::annotate(const CaptureId& id, const Annotation& patch) {
  std::unique_lock lock(mu_);
  CaptureRecord rec = require_capture(id);
  if (patch.empty()) return rec;
  if (patch.title) rec.annotation.title = patch.title;
  if (patch.description) rec.annotation.description = patch.description;
  if (patch.intent) rec.annotation.intent = patch.intent;
  put_document(kCaptures, id, to_document(rec));
  captures_[id] = rec;
  return rec;
}

CaptureRecord Repository::correct_timestamp(const CaptureId& id,
                                            Timestamp new_timestamp,
                                            const std::string& note) {
  std::unique_lock lock(mu_);
  if (new_timestamp <= 0) {
    throw Error(ErrorCode::kValidation, "timestamp nonpositive",
                {"timestamp nonpositive"});
  }
  CaptureRecord rec = require_capture(id);

  // A correction may not turn an existing link backwards in time.
  for (const auto& [pid, project] : projects_) {
    if (!project.members.contains(id)) continue;
    auto g = links_.find(pid);
    if (g == links_.end()) continue;
    auto problems =
        validate_graph(g->second, member_index_locked(project, {{id, new_timestamp}}));
    if (!problems.empty()) {
      throw Error(ErrorCode::kChronology,
                  "correction would reverse links in project " + pid,
                  std::move(problems));
    }
  }

  auto log = audit_[id];
  log.push_back({rec.timestamp, new_timestamp, note, wall_now()});
  put_document(kAudit, id, canonical_text(Json(log)));
  audit_[id] = log;

  rec.timestamp = new_timestamp;
  put_document(kCaptures, id, to_document(rec));
  captures_[id] = rec;
  return rec;
}

std::vector<TimestampCorrection> Repository::audit_log(const CaptureId& id) const {
  std::shared_lock lock(mu_);
  auto it = audit_.find(id);
  if (it == audit_.end()) return {};
  return it->second;
}

// ---------------------------------------------------------------------------
// Coding

std::vector<CodingScheme> Repository::schemes() const {
  std::shared_lock lock(mu_);
  auto out = builtin_schemes();
  for (const auto& [id, s] : custom_schemes_) out.push_back(s);
  return out;
}

std::optional<CodingScheme> Repository::scheme(const SchemeId& id) const {
  for (const auto& s : builtin_schemes())
    if (s.scheme_id == id) return s;
  std::shared_lock lock(mu_);
  auto it = custom_schemes_.find(id);
  if (it == custom_schemes_.end()) return std::nullopt;
  return it->second;
}

CodingScheme Repository::put_scheme(const CodingScheme& scheme) {
  auto problems = validate_scheme(scheme);
  if (!problems.empty())
    throw Error(ErrorCode::kValidation, "invalid coding scheme", std::move(problems));
  require_safe(scheme.scheme_id, "scheme");
  if (is_builtin(scheme.scheme_id)) {
    if (this->scheme(scheme.scheme_id) == scheme) return scheme;
    throw Error(ErrorCode::kConflict,
                "built-in scheme cannot be redefined: " + scheme.scheme_id);
  }
  std::unique_lock lock(mu_);
  if (auto it = custom_schemes_.find(scheme.scheme_id);
      it != custom_schemes_.end() && it->second != scheme) {
    for (const auto& [key, a] : codes_) {
      if (key.first != scheme.scheme_id) continue;
      for (const auto& c : a.categories) {
        if (std::find(scheme.categories.begin(), scheme.categories.end(), c) ==
            scheme.categories.end()) {
          throw Error(ErrorCode::kConflict,
                      "category '" + c + "' is still assigned to " + a.capture_id);
        }
      }
    }
  }
  put_document(kSchemes, scheme.scheme_id, to_document(scheme));
  custom_schemes_[scheme.scheme_id] = scheme;
  return scheme;
}

CodeAssignment Repository::set_codes(const CaptureId& capture_id,
                                     const SchemeId& scheme_id,
                                     const std::vector<std::string>& categories) {
  auto s = scheme(scheme_id);
  if (!s) throw Error(ErrorCode::kUnknownScheme, "unknown scheme " + scheme_id, {scheme_id});
  CodeAssignment a = assign_codes(capture_id, *s, categories);
  std::unique_lock lock(mu_);
  require_capture(capture_id);
  put_document(kCodes, codes_key(scheme_id, capture_id), to_document(a));
  codes_[{scheme_id, capture_id}] = a;
  return a;
}

std::optional<CodeAssignment> Repository::assignment(const CaptureId& capture_id,
                                                     const SchemeId& scheme_id) const {
  std::shared_lock lock(mu_);
  auto it = codes_.find({scheme_id, capture_id});
  if (it == codes_.end()) return std::nullopt;
  return it->second;
}

std::vector<CodeAssignment> Repository::assignments(const SchemeId& scheme_id) const {
  std::shared_lock lock(mu_);
  std::vector<CodeAssignment> out;
  for (const auto& [key, a] : codes_)
    if (key.first == scheme_id) out.push_back(a);
  return out;
}

// ---------------------------------------------------------------------------
// Link graphs

LinkGraph Repository::links(const ProjectId& project_id) const {
  std::shared_lock lock(mu_);
  require_project(project_id);
  auto it = links_.find(project_id);
  if (it == links_.end()) return LinkGraph{project_id, {}, {}};
  return it->second;
}

LinkGraph Repository::put_links(const ProjectId& project_id, LinkGraph graph) {
  std::unique_lock lock(mu_);
  const Project& p = require_project(project_id);
  graph.project_id = project_id;
  auto problems = validate_graph(graph, member_index_locked(p));
  if (!problems.empty()) {
    ErrorCode code = ErrorCode::kValidation;
    for (const auto& v : problems) {
      if (v.find("forward in time") != std::string::npos) code = ErrorCode::kChronology;
    }
    throw Error(code, "invalid link graph", std::move(problems));
  }
  put_document(kLinks, project_id, to_document(graph));
  links_[project_id] = graph;
  return graph;
}

LinkGraph Repository::add_link(const ProjectId& project_id, const CaptureId& from,
                               const CaptureId& to) {
  std::unique_lock lock(mu_);
  const Project& p = require_project(project_id);
  auto it = links_.find(project_id);
  LinkGraph g = it == links_.end() ? LinkGraph{project_id, {}, {}} : it->second;
  g = protobooth::add_link(std::move(g), member_index_locked(p), from, to);
  put_document(kLinks, project_id, to_document(g));
  links_[project_id] = g;
  return g;
}

LinkGraph Repository::set_node_class(const ProjectId& project_id,
                                     const CaptureId& id, NodeClass cls) {
  std::unique_lock lock(mu_);
  const Project& p = require_project(project_id);
  auto it = links_.find(project_id);
  LinkGraph g = it == links_.end() ? LinkGraph{project_id, {}, {}} : it->second;
  g = protobooth::set_node_class(std::move(g), member_index_locked(p), id, cls);
  put_document(kLinks, project_id, to_document(g));
  links_[project_id] = g;
  return g;
}

// ---------------------------------------------------------------------------
// Queries

std::optional<CaptureRecord> Repository::capture(const CaptureId& id) const {
  std::shared_lock lock(mu_);
  auto it = captures_.find(id);
  if (it == captures_.end()) return std::nullopt;
  return it->second;
}

std::vector<CaptureRecord> Repository::query_captures(const CaptureFilter& filter) const {
  std::shared_lock lock(mu_);
  const std::set<CardId>* cards = nullptr;
  if (filter.user) {
    auto u = users_.find(*filter.user);
    if (u == users_.end()) return {};
    cards = &u->second.card_ids;
  }
  const Project* project = nullptr;
  if (filter.project) {
    auto p = projects_.find(*filter.project);
    if (p == projects_.end()) return {};
    project = &p->second;
  }
  std::vector<CaptureRecord> out;
  for (const auto& [id, rec] : captures_) {
    if (cards && !cards->contains(rec.card_id)) continue;
    if (filter.booth && rec.booth_id != *filter.booth) continue;
    if (project && !project->members.contains(id)) continue;
    if (filter.from && rec.timestamp < *filter.from) continue;
    if (filter.to && rec.timestamp > *filter.to) continue;
    out.push_back(rec);
  }
  return canonical_order(std::move(out));
}

std::optional<Bytes> Repository::view_bytes(const CaptureId& id, ViewAngle angle) const {
  auto rec = capture(id);
  if (!rec) return std::nullopt;
  auto it = rec->views.find(angle);
  if (it == rec->views.end()) return std::nullopt;
  return blobs_->get(it->second.content_hash);
}

std::size_t Repository::capture_count() const {
  std::shared_lock lock(mu_);
  return captures_.size();
}

// ---------------------------------------------------------------------------
// Integrity

IntegrityReport Repository::verify() const {
  std::shared_lock lock(mu_);
  IntegrityReport report;
  report.violations = load_errors_;
  auto add = [&](std::string kind, std::string subject, std::string detail) {
    report.violations.push_back({std::move(kind), std::move(subject), std::move(detail)});
  };

  std::set<std::string> referenced;
  for (const auto& [id, rec] : captures_) {
    ++report.captures_checked;
    for (const auto& v : validate_capture(rec)) add("invalid_capture", id, v);
    for (const auto& [angle, ref] : rec.views) {
      referenced.insert(ref.content_hash);
      auto bytes = blobs_->get(ref.content_hash);
      const std::string where = std::string(to_string(angle)) + " " + ref.content_hash;
      if (!bytes) {
        add("missing_blob", id, where);
      } else if (sha256_hex(*bytes) != ref.content_hash) {
        add("corrupt_blob", id, where);
      }
    }
  }
  for (const auto& hash : blobs_->list()) {
    ++report.blobs_checked;
    if (!referenced.contains(hash)) add("orphan_blob", hash, "not referenced by any capture");
  }

  for (const auto& [pid, p] : projects_) {
    for (const auto& u : p.contributors)
      if (!users_.contains(u)) add("dangling_contributor", pid, u);
    for (const auto& c : p.members)
      if (!captures_.contains(c)) add("dangling_member", pid, c);
  }

  for (const auto& [key, a] : codes_) {
    const std::string subject = key.first + "/" + key.second;
    if (!captures_.contains(a.capture_id)) add("invalid_assignment", subject, "unknown capture");
    std::optional<CodingScheme> s;
    for (const auto& b : builtin_schemes())
      if (b.scheme_id == a.scheme_id) s = b;
    if (auto it = custom_schemes_.find(a.scheme_id); it != custom_schemes_.end())
      s = it->second;
    if (!s) {
      add("invalid_assignment", subject, "unknown scheme");
      continue;
    }
    for (const auto& c : a.categories) {
      if (std::find(s->categories.begin(), s->categories.end(), c) == s->categories.end())
        add("invalid_assignment", subject, "unknown category " + c);
    }
  }

  for (const auto& [pid, g] : links_) {
    auto p = projects_.find(pid);
    if (p == projects_.end()) {
      add("dangling_graph", pid, "graph for unknown project");
      continue;
    }
    for (const auto& v : validate_graph(g, member_index_locked(p->second))) {
      const bool chronology = v.find("forward in time") != std::string::npos;
      add(chronology ? "chronology" : "invalid_graph", pid, v);
    }
  }

  for (const auto& [id, log] : audit_) {
    auto rec = captures_.find(id);
    if (rec == captures_.end()) {
      add("audit_mismatch", id, "audit log for unknown capture");
      continue;
    }
    for (std::size_t i = 1; i < log.size(); ++i) {
      if (log[i].old_timestamp != log[i - 1].new_timestamp)
        add("audit_mismatch", id, "audit chain broken at entry " + std::to_string(i));
    }
    if (!log.empty() && log.back().new_timestamp != rec->second.timestamp)
      add("audit_mismatch", id, "timestamp differs from last correction");
  }
  return report;
}

std::size_t Repository::collect_garbage() {
  std::unique_lock lock(mu_);
  std::set<std::string> referenced;
  for (const auto& [id, rec] : captures_)
    for (const auto& [angle, ref] : rec.views) referenced.insert(ref.content_hash);
  std::size_t removed = 0;
  for (const auto& hash : blobs_->list()) {
    if (!referenced.contains(hash)) {
      blobs_->remove(hash);
      ++removed;
    }
  }
  return removed;
}

RepositorySnapshot Repository::snapshot() const {
  std::shared_lock lock(mu_);
  RepositorySnapshot snap;
  for (const char* collection : kAllCollections) {
    for (const auto& key : documents_->keys(collection)) {
      if (auto text = documents_->get(collection, key))
        snap.documents[std::string(collection) + "/" + key] = *text;
    }
  }
  for (const auto& hash : blobs_->list()) {
    if (auto bytes = blobs_->get(hash)) snap.blobs[hash] = std::move(*bytes);
  }
  return snap;
}

std::vector<std::pair<std::string, std::string>> Repository::raw_documents(
    const std::string& collection) const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& key : documents_->keys(collection)) {
    if (auto text = documents_->get(collection, key)) out.emplace_back(key, *text);
  }
  return out;
}

std::optional<Bytes> Repository::blob(const std::string& hash) const {
  return blobs_->get(hash);
}

RestoreReport Repository::restore(const RestoreSet& content) {
  std::unique_lock lock(mu_);
  RestoreReport report;
  for (const auto& bytes : content.blobs) {
    if (blobs_->contains(sha256_hex(bytes))) continue;
    blobs_->put(bytes);
    ++report.blobs_written;
  }
  // Captures last so that everything they point at is already in place.
  std::vector<std::string> order;
  for (const auto& [collection, docs] : content.documents)
    if (collection != kCaptures) order.push_back(collection);
  order.emplace_back(kCaptures);
  for (const auto& collection : order) {
    auto docs = content.documents.find(collection);
    if (docs == content.documents.end()) continue;
    for (const auto& [key, text] : docs->second) {
      auto existing = documents_->get(collection, key);
      if (!existing) {
        documents_->put(collection, key, text);
        ++report.documents_written;
      } else if (*existing == text) {
        ++report.documents_skipped;
      } else {
        ++report.conflicts;
      }
    }
  }
  load();
  return report;
}

}  // namespace protobooth::backend
