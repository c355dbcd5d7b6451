#pragma once

// Canonical structured-text (JSON) form of the domain types. Keys are emitted
// in sorted order so a document is a pure function of the value.

#include <json.hpp>
#include <string>

#include "protobooth/link_graph.hpp"
#include "protobooth/model.hpp"
#include "protobooth/schemes.hpp"

namespace protobooth {

using Json = nlohmann::json;

void to_json(Json& j, const ImageRef& v);
void from_json(const Json& j, ImageRef& v);
void to_json(Json& j, const Annotation& v);
void from_json(const Json& j, Annotation& v);
void to_json(Json& j, const CaptureRecord& v);
void from_json(const Json& j, CaptureRecord& v);
void to_json(Json& j, const User& v);
void from_json(const Json& j, User& v);
void to_json(Json& j, const Project& v);
void from_json(const Json& j, Project& v);
void to_json(Json& j, const CodingScheme& v);
void from_json(const Json& j, CodingScheme& v);
void to_json(Json& j, const CodeAssignment& v);
void from_json(const Json& j, CodeAssignment& v);
void to_json(Json& j, const LinkGraph& v);
void from_json(const Json& j, LinkGraph& v);

/// Parses a capture manifest, reporting structural problems (unknown or
/// duplicate angle names, missing fields) as violations instead of throwing.
/// On success `out` is filled and the returned list is empty.
std::vector<std::string> parse_capture_manifest(const Json& j,
                                                CaptureRecord& out);

/// Stable text form: two-space indent, sorted keys, trailing newline.
std::string canonical_text(const Json& j);

template <typename T>
std::string to_document(const T& value) {
  return canonical_text(Json(value));
}

template <typename T>
T from_document(std::string_view text) {
  return Json::parse(text).get<T>();
}

}  // namespace protobooth
