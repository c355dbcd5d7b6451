#pragma once

#include <string>
#include <vector>

#include "protobooth/model.hpp"

namespace protobooth {

struct CodingScheme {
  SchemeId scheme_id;
  std::string name;
  std::vector<std::string> categories;

  bool operator==(const CodingScheme&) const = default;
};

/// Manual coding of one capture under one scheme. Categories are kept in the
/// scheme's category order without duplicates.
struct CodeAssignment {
  CaptureId capture_id;
  SchemeId scheme_id;
  std::vector<std::string> categories;

  bool operator==(const CodeAssignment&) const = default;
};

inline constexpr const char* kMaterialsScheme = "materials";
inline constexpr const char* kToolsScheme = "tools";
inline constexpr const char* kDisciplinesScheme = "disciplines";

/// The materials (9), tools (6) and disciplines (3) schemes, in that order.
std::vector<CodingScheme> builtin_schemes();

/// Non-empty, unique category names, non-empty id.
std::vector<std::string> validate_scheme(const CodingScheme& scheme);

/// Throws Error(kUnknownCategory) naming the first label not in the scheme.
CodeAssignment assign_codes(const CaptureId& capture_id,
                            const CodingScheme& scheme,
                            const std::vector<std::string>& categories);

}  // namespace protobooth
