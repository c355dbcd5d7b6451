#include "protobooth/serialize.hpp"

#include "protobooth/error.hpp"
#include "protobooth/ingest.hpp"

namespace protobooth {

void to_json(Json& j, const ImageRef& v) {
  j = Json{{"content_hash", v.content_hash},
           {"media_type", v.media_type},
           {"byte_length", v.byte_length}};
}

void from_json(const Json& j, ImageRef& v) {
  j.at("content_hash").get_to(v.content_hash);
  j.at("media_type").get_to(v.media_type);
  j.at("byte_length").get_to(v.byte_length);
}

void to_json(Json& j, const Annotation& v) {
  j = Json::object();
  if (v.title) j["title"] = *v.title;
  if (v.description) j["description"] = *v.description;
  if (v.intent) j["intent"] = *v.intent;
}

void from_json(const Json& j, Annotation& v) {
  v = Annotation{};
  auto opt = [&](const char* key, std::optional<std::string>& field) {
    if (auto it = j.find(key); it != j.end() && !it->is_null())
      field = it->get<std::string>();
  };
  opt("title", v.title);
  opt("description", v.description);
  opt("intent", v.intent);
}

void to_json(Json& j, const CaptureRecord& v) {
  Json views = Json::array();
  for (ViewAngle a : kAllAngles) {
    auto it = v.views.find(a);
    if (it == v.views.end()) continue;
    Json entry = it->second;
    entry["angle"] = to_string(a);
    views.push_back(std::move(entry));
  }
  j = Json{{"capture_id", v.capture_id},
           {"booth_id", v.booth_id},
           {"card_id", v.card_id},
           {"timestamp", v.timestamp},
           {"views", std::move(views)},
           {"annotation", v.annotation}};
}

std::vector<std::string> parse_capture_manifest(const Json& j,
                                                CaptureRecord& out) {
  std::vector<std::string> violations;
  if (!j.is_object()) return {"manifest is not an object"};
  CaptureRecord rec;
  auto text = [&](const char* key, std::string& field) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      violations.push_back(std::string("missing field: ") + key);
    } else {
      field = it->get<std::string>();
    }
  };
  text("capture_id", rec.capture_id);
  text("booth_id", rec.booth_id);
  text("card_id", rec.card_id);
  if (auto it = j.find("timestamp"); it == j.end() || !it->is_number_integer()) {
    violations.emplace_back("missing field: timestamp");
  } else {
    rec.timestamp = it->get<Timestamp>();
  }
  if (auto it = j.find("annotation"); it != j.end() && it->is_object()) {
    rec.annotation = it->get<Annotation>();
  }
  auto views = j.find("views");
  if (views == j.end() || !views->is_array()) {
    violations.emplace_back("missing field: views");
  } else {
    for (const auto& entry : *views) {
      if (!entry.is_object() || !entry.contains("angle")) {
        violations.emplace_back("view entry without angle");
        continue;
      }
      const auto name = entry["angle"].get<std::string>();
      auto angle = parse_view_angle(name);
      if (!angle) {
        violations.push_back("unknown angle: " + name);
        continue;
      }
      if (rec.views.contains(*angle)) {
        violations.push_back("duplicate angle: " + name);
        continue;
      }
      try {
        rec.views.emplace(*angle, entry.get<ImageRef>());
      } catch (const Json::exception&) {
        violations.push_back("malformed view: " + name);
      }
    }
  }
  if (violations.empty()) out = std::move(rec);
  return violations;
}

void from_json(const Json& j, CaptureRecord& v) {
  auto violations = parse_capture_manifest(j, v);
  if (!violations.empty()) {
    throw Error(ErrorCode::kValidation, "malformed capture document",
                std::move(violations));
  }
}

void to_json(Json& j, const User& v) {
  j = Json{{"user_id", v.user_id},
           {"display_name", v.display_name},
           {"card_ids", v.card_ids}};
}

void from_json(const Json& j, User& v) {
  j.at("user_id").get_to(v.user_id);
  v.display_name = j.value("display_name", "");
  v.card_ids = j.value("card_ids", std::set<CardId>{});
}

void to_json(Json& j, const Project& v) {
  j = Json{{"project_id", v.project_id},
           {"title", v.title},
           {"description", v.description},
           {"contributors", v.contributors},
           {"members", v.members}};
}

void from_json(const Json& j, Project& v) {
  j.at("project_id").get_to(v.project_id);
  v.title = j.value("title", "");
  v.description = j.value("description", "");
  v.contributors = j.value("contributors", std::set<UserId>{});
  v.members = j.value("members", std::set<CaptureId>{});
}

void to_json(Json& j, const CodingScheme& v) {
  j = Json{{"scheme_id", v.scheme_id},
           {"name", v.name},
           {"categories", v.categories}};
}

void from_json(const Json& j, CodingScheme& v) {
  j.at("scheme_id").get_to(v.scheme_id);
  v.name = j.value("name", v.scheme_id);
  j.at("categories").get_to(v.categories);
}

void to_json(Json& j, const CodeAssignment& v) {
  j = Json{{"capture_id", v.capture_id},
           {"scheme_id", v.scheme_id},
           {"categories", v.categories}};
}

void from_json(const Json& j, CodeAssignment& v) {
  j.at("capture_id").get_to(v.capture_id);
  j.at("scheme_id").get_to(v.scheme_id);
  j.at("categories").get_to(v.categories);
}

void to_json(Json& j, const LinkGraph& v) {
  Json classes = Json::object();
  for (const auto& [id, cls] : v.node_classes) classes[id] = to_string(cls);
  Json edges = Json::array();
  for (const auto& [from, to] : v.edges) edges.push_back(Json::array({from, to}));
  j = Json{{"project_id", v.project_id},
           {"node_classes", std::move(classes)},
           {"edges", std::move(edges)}};
}

void from_json(const Json& j, LinkGraph& v) {
  v = LinkGraph{};
  v.project_id = j.value("project_id", "");
  if (auto it = j.find("node_classes"); it != j.end()) {
    for (const auto& [id, name] : it->items()) {
      auto cls = parse_node_class(name.get<std::string>());
      if (!cls) {
        throw Error(ErrorCode::kBadRequest,
                    "unknown node class: " + name.get<std::string>());
      }
      v.node_classes[id] = *cls;
    }
  }
  if (auto it = j.find("edges"); it != j.end()) {
    for (const auto& e : *it) {
      if (e.is_array() && e.size() == 2) {
        v.edges.emplace(e[0].get<std::string>(), e[1].get<std::string>());
      } else if (e.is_object()) {
        v.edges.emplace(e.at("from").get<std::string>(),
                        e.at("to").get<std::string>());
      } else {
        throw Error(ErrorCode::kBadRequest, "malformed edge");
      }
    }
  }
}

std::string canonical_text(const Json& j) { return j.dump(2) + "\n"; }

void to_json(Json& j, const IngestReceipt& v) {
  j = Json{{"capture_id", v.capture_id},
           {"created", v.created},
           {"stored_views", v.stored_views}};
}

void from_json(const Json& j, IngestReceipt& v) {
  j.at("capture_id").get_to(v.capture_id);
  j.at("created").get_to(v.created);
  j.at("stored_views").get_to(v.stored_views);
}

}  // namespace protobooth
