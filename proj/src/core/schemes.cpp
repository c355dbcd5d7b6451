#include "protobooth/schemes.hpp"

#include <algorithm>
#include <set>

#include "protobooth/error.hpp"

namespace protobooth {

std::vector<CodingScheme> builtin_schemes() {
  return {
      {kMaterialsScheme,
       "Materials",
       {"foam", "cardboard", "MDF", "wood", "hard plastics", "soft plastics",
        "metal", "electronics", "other"}},
      {kToolsScheme,
       "Tools",
       {"hand tools", "3D-printer", "laser cutter", "machining",
        "vacuum former", "computer"}},
      {kDisciplinesScheme,
       "Disciplines",
       {"mechanics", "software", "electronics"}},
  };
}

std::vector<std::string> validate_scheme(const CodingScheme& scheme) {
  std::vector<std::string> out;
  if (scheme.scheme_id.empty()) out.emplace_back("scheme_id empty");
  if (scheme.categories.empty()) out.emplace_back("category list empty");
  std::set<std::string> seen;
  for (const auto& c : scheme.categories) {
    if (c.empty()) out.emplace_back("empty category name");
    if (!seen.insert(c).second) out.push_back("duplicate category: " + c);
  }
  return out;
}

CodeAssignment assign_codes(const CaptureId& capture_id,
                            const CodingScheme& scheme,
                            const std::vector<std::string>& categories) {
  for (const auto& label : categories) {
    if (std::find(scheme.categories.begin(), scheme.categories.end(), label) ==
        scheme.categories.end()) {
      throw Error(ErrorCode::kUnknownCategory,
                  "unknown category '" + label + "' in scheme " +
                      scheme.scheme_id,
                  {label});
    }
  }
  CodeAssignment out{capture_id, scheme.scheme_id, {}};
  for (const auto& c : scheme.categories) {
    if (std::find(categories.begin(), categories.end(), c) != categories.end())
      out.categories.push_back(c);
  }
  return out;
}

}  // namespace protobooth
