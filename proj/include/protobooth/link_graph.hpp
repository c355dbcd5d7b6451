#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "protobooth/model.hpp"

namespace protobooth {

enum class NodeClass { Internal, ExternalTest, FinalConcept };

std::string_view to_string(NodeClass cls);
std::optional<NodeClass> parse_node_class(std::string_view name);

using Edge = std::pair<CaptureId, CaptureId>;  // (from, to)

/// Directed links between the prototypes of one project. Nodes without an
/// explicit class are Internal.
struct LinkGraph {
  ProjectId project_id;
  std::map<CaptureId, NodeClass> node_classes;
  std::set<Edge> edges;

  NodeClass class_of(const CaptureId& id) const;
  std::optional<CaptureId> final_concept() const;
  /// Every id mentioned by a class entry or an edge.
  std::set<CaptureId> nodes() const;

  bool operator==(const LinkGraph&) const = default;
};

/// Adds from→to. `members` indexes the project's captures; both endpoints
/// must be members and from must precede to in canonical order.
LinkGraph add_link(LinkGraph graph, const ChronologicalIndex& members,
                   const CaptureId& from, const CaptureId& to);

/// Sets a node's class. At most one FinalConcept per graph.
LinkGraph set_node_class(LinkGraph graph, const ChronologicalIndex& members,
                         const CaptureId& id, NodeClass cls);

/// All violated LinkGraph invariants against the given member index.
std::vector<std::string> validate_graph(const LinkGraph& graph,
                                        const ChronologicalIndex& members);

/// For every node: does a directed path lead to the final concept?
/// The final node itself reaches it trivially.
std::map<CaptureId, bool> reachability(const LinkGraph& graph);

}  // namespace protobooth
