#pragma once

#include <map>

#include "protobooth/hash.hpp"
#include "protobooth/model.hpp"
#include "protobooth/serialize.hpp"

namespace protobooth {

using ImagePayloads = std::map<ViewAngle, Bytes>;

struct IngestReceipt {
  CaptureId capture_id;
  bool created = false;  // false when deduplicated by capture_id
  int stored_views = 0;

  bool operator==(const IngestReceipt&) const = default;
};

void to_json(Json& j, const IngestReceipt& v);
void from_json(const Json& j, IngestReceipt& v);

}  // namespace protobooth
