#include "protobooth/backend/archive.hpp"

#include <algorithm>
#include <cstring>
#include <set>

#include "protobooth/error.hpp"
#include "protobooth/fsutil.hpp"
#include "protobooth/serialize.hpp"

namespace fs = std::filesystem;

namespace protobooth::backend {

namespace {

constexpr std::size_t kBlock = 512;
constexpr const char* kManifest = "manifest.json";

Bytes text_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

void put_octal(unsigned char* field, std::size_t width, std::uint64_t value) {
  // width includes the terminating NUL.
  std::string digits(width - 1, '0');
  for (std::size_t i = width - 1; i-- > 0;) {
    digits[i] = static_cast<char>('0' + (value & 7));
    value >>= 3;
  }
  std::memcpy(field, digits.data(), width - 1);
  field[width - 1] = 0;
}

std::uint64_t get_octal(const unsigned char* field, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width && field[i]; ++i) {
    if (field[i] == ' ') continue;
    if (field[i] < '0' || field[i] > '7')
      throw Error(ErrorCode::kBadRequest, "malformed tar header");
    v = v * 8 + (field[i] - '0');
  }
  return v;
}

std::string get_string(const unsigned char* field, std::size_t width) {
  std::size_t n = 0;
  while (n < width && field[n]) ++n;
  return std::string(reinterpret_cast<const char*>(field), n);
}

void check_path(const std::string& path) {
  if (path.empty() || path.front() == '/' || path.find('\\') != std::string::npos)
    throw Error(ErrorCode::kBadRequest, "unsafe archive path: " + path);
  for (const auto& part : fs::path(path)) {
    if (part == ".." || part == ".")
      throw Error(ErrorCode::kBadRequest, "unsafe archive path: " + path);
  }
}

std::string document_path(const std::string& collection, const std::string& key) {
  if (collection == kCaptures) return "captures/" + key + "/meta.json";
  return collection + "/" + key + ".json";
}

std::string image_path(const CaptureRecord& rec, ViewAngle angle) {
  const auto& ref = rec.views.at(angle);
  return "captures/" + rec.capture_id + "/" + std::string(to_string(angle)) + "." +
         std::string(extension_for(ref.media_type));
}

}  // namespace

void Archive::write_directory(const fs::path& dir) const {
  fs::create_directories(dir);
  for (const auto& [path, bytes] : files) {
    check_path(path);
    write_file_atomic(dir / path, bytes);
  }
}

Archive Archive::read_directory(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::kNotFound, "archive directory not found: " + dir.string());
  Archive a;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (fs::path(rel).filename().string().starts_with(".tmp-")) continue;
    a.files[rel] = *read_file(entry.path());
  }
  return a;
}

Bytes Archive::to_tar() const {
  Bytes out;
  for (const auto& [path, bytes] : files) {
    check_path(path);
    unsigned char header[kBlock] = {};
    std::string name = path;
    std::string prefix;
    if (name.size() > 100) {
      const auto cut = path.rfind('/', 155);
      if (cut == std::string::npos || path.size() - cut - 1 > 100)
        throw Error(ErrorCode::kBadRequest, "archive path too long: " + path);
      prefix = path.substr(0, cut);
      name = path.substr(cut + 1);
    }
    std::memcpy(header, name.data(), name.size());
    put_octal(header + 100, 8, 0644);
    put_octal(header + 108, 8, 0);
    put_octal(header + 116, 8, 0);
    put_octal(header + 124, 12, bytes.size());
    put_octal(header + 136, 12, 0);
    header[156] = '0';
    std::memcpy(header + 257, "ustar", 6);
    std::memcpy(header + 263, "00", 2);
    std::memcpy(header + 345, prefix.data(), prefix.size());
    std::memset(header + 148, ' ', 8);
    unsigned sum = 0;
    for (unsigned char c : header) sum += c;
    put_octal(header + 148, 7, sum);
    header[155] = ' ';
    out.insert(out.end(), header, header + kBlock);
    out.insert(out.end(), bytes.begin(), bytes.end());
    out.resize(out.size() + (kBlock - bytes.size() % kBlock) % kBlock, 0);
  }
  out.resize(out.size() + 2 * kBlock, 0);
  return out;
}

Archive Archive::from_tar(std::span<const unsigned char> tar) {
  Archive a;
  std::size_t pos = 0;
  while (pos + kBlock <= tar.size()) {
    const unsigned char* h = tar.data() + pos;
    if (std::all_of(h, h + kBlock, [](unsigned char c) { return c == 0; })) break;
    unsigned stored = static_cast<unsigned>(get_octal(h + 148, 8));
    unsigned sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i)
      sum += (i >= 148 && i < 156) ? ' ' : h[i];
    if (sum != stored) throw Error(ErrorCode::kBadRequest, "tar checksum mismatch");
    std::string name = get_string(h, 100);
    const std::string prefix = get_string(h + 345, 155);
    if (!prefix.empty()) name = prefix + "/" + name;
    const std::uint64_t size = get_octal(h + 124, 12);
    const char type = static_cast<char>(h[156]);
    pos += kBlock;
    if (pos + size > tar.size()) throw Error(ErrorCode::kBadRequest, "truncated tar stream");
    if (type == '0' || type == '\0') {
      check_path(name);
      a.files[name] = Bytes(tar.begin() + pos, tar.begin() + pos + size);
    }
    pos += (size + kBlock - 1) / kBlock * kBlock;
  }
  return a;
}

Archive Archive::load(const fs::path& path) {
  if (fs::is_directory(path)) return read_directory(path);
  auto bytes = read_file(path);
  if (!bytes) throw Error(ErrorCode::kNotFound, "archive not found: " + path.string());
  return from_tar(*bytes);
}

Archive export_raw(const Repository& repo, const std::optional<ProjectId>& project_id) {
  std::optional<Project> project;
  if (project_id) {
    project = repo.project(*project_id);
    if (!project)
      throw Error(ErrorCode::kNotFound, "unknown project " + *project_id, {*project_id});
  }

  Archive archive;
  Json captures = Json::array();
  std::set<CaptureId> included;
  for (const auto& [id, text] : repo.raw_documents(kCaptures)) {
    if (project && !project->members.contains(id)) continue;
    const auto rec = from_document<CaptureRecord>(text);
    archive.files[document_path(kCaptures, id)] = text_bytes(text);
    for (const auto& [angle, ref] : rec.views) {
      auto bytes = repo.blob(ref.content_hash);
      if (!bytes) {
        throw Error(ErrorCode::kStorage,
                    "blob missing for " + id + "/" + std::string(to_string(angle)));
      }
      archive.files[image_path(rec, angle)] = std::move(*bytes);
    }
    included.insert(id);
    captures.push_back(id);
  }

  std::set<UserId> users;
  std::set<SchemeId> schemes;
  if (project) {
    users = project->contributors;
    for (const auto& id : included) {
      auto rec = repo.capture(id);
      if (rec) {
        if (auto owner = repo.user_for_card(rec->card_id)) users.insert(owner->user_id);
      }
    }
  }
  for (const auto& [key, text] : repo.raw_documents(kCodes)) {
    const auto a = from_document<CodeAssignment>(text);
    if (project && !included.contains(a.capture_id)) continue;
    schemes.insert(a.scheme_id);
    archive.files[document_path(kCodes, key)] = text_bytes(text);
  }
  for (const auto& [key, text] : repo.raw_documents(kAudit)) {
    if (project && !included.contains(key)) continue;
    archive.files[document_path(kAudit, key)] = text_bytes(text);
  }
  for (const auto& [key, text] : repo.raw_documents(kUsers)) {
    if (project && !users.contains(key)) continue;
    archive.files[document_path(kUsers, key)] = text_bytes(text);
  }
  for (const auto& [key, text] : repo.raw_documents(kSchemes)) {
    if (project && !schemes.contains(key)) continue;
    archive.files[document_path(kSchemes, key)] = text_bytes(text);
  }
  for (const char* collection : {kProjects, kLinks}) {
    for (const auto& [key, text] : repo.raw_documents(collection)) {
      if (project && key != *project_id) continue;
      archive.files[document_path(collection, key)] = text_bytes(text);
    }
  }

  Json listing = Json::object();
  for (const auto& [path, bytes] : archive.files) {
    listing[path] = Json{{"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}};
  }
  Json manifest{{"format", kArchiveFormat},
                {"project", project_id ? Json(*project_id) : Json(nullptr)},
                {"captures", std::move(captures)},
                {"files", std::move(listing)}};
  archive.files[kManifest] = text_bytes(canonical_text(manifest));
  return archive;
}

RestoreReport import_archive(Repository& repo, const Archive& archive) {
  auto manifest_bytes = archive.files.find(kManifest);
  if (manifest_bytes == archive.files.end())
    throw Error(ErrorCode::kValidation, "archive has no manifest", {"manifest missing"});
  Json manifest;
  try {
    manifest = Json::parse(manifest_bytes->second.begin(), manifest_bytes->second.end());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, "unreadable manifest", {e.what()});
  }
  if (manifest.value("format", "") != kArchiveFormat)
    throw Error(ErrorCode::kValidation, "unsupported archive format", {"format"});

  std::vector<std::string> problems;
  const Json& listing = manifest.at("files");
  for (const auto& [path, info] : listing.items()) {
    auto it = archive.files.find(path);
    if (it == archive.files.end()) {
      problems.push_back("listed but absent: " + path);
    } else if (sha256_hex(it->second) != info.value("sha256", "")) {
      problems.push_back("hash mismatch: " + path);
    }
  }
  for (const auto& [path, bytes] : archive.files) {
    if (path != kManifest && !listing.contains(path))
      problems.push_back("not in manifest: " + path);
  }
  if (!problems.empty())
    throw Error(ErrorCode::kHashMismatch, "payload does not match manifest", problems);

  RestoreSet set;
  for (const auto& [path, bytes] : archive.files) {
    if (path == kManifest) continue;
    const fs::path p(path);
    std::vector<std::string> parts;
    for (const auto& part : p) parts.push_back(part.string());
    const std::string text = to_text(bytes);

    if (parts.size() == 3 && parts[0] == kCaptures) {
      if (parts[2] != "meta.json") continue;  // images are pulled in below
      CaptureRecord rec;
      try {
        rec = from_document<CaptureRecord>(text);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kValidation, "unreadable capture " + parts[1], {e.what()});
      }
      auto violations = validate_capture(rec);
      if (rec.capture_id != parts[1]) violations.push_back("capture_id does not match path");
      if (!violations.empty())
        throw Error(ErrorCode::kValidation, "invalid capture " + parts[1], violations);
      for (const auto& [angle, ref] : rec.views) {
        auto img = archive.files.find(image_path(rec, angle));
        if (img == archive.files.end() || sha256_hex(img->second) != ref.content_hash) {
          throw Error(ErrorCode::kHashMismatch, "payload does not match manifest",
                      {image_path(rec, angle)});
        }
        set.blobs.push_back(img->second);
      }
      set.documents[kCaptures][rec.capture_id] = text;
    } else if (parts.size() == 3 && parts[0] == kCodes && parts[2].ends_with(".json")) {
      set.documents[kCodes][parts[1] + "/" + parts[2].substr(0, parts[2].size() - 5)] = text;
    } else if (parts.size() == 2 && parts[1].ends_with(".json") &&
               (parts[0] == kUsers || parts[0] == kProjects || parts[0] == kSchemes ||
                parts[0] == kLinks || parts[0] == kAudit)) {
      set.documents[parts[0]][parts[1].substr(0, parts[1].size() - 5)] = text;
    } else {
      throw Error(ErrorCode::kValidation, "unexpected archive entry: " + path, {path});
    }
  }
  return repo.restore(set);
}

}  // namespace protobooth::backend
