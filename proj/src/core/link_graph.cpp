#include "protobooth/link_graph.hpp"

#include <deque>

#include "protobooth/error.hpp"

namespace protobooth {

std::string_view to_string(NodeClass cls) {
  switch (cls) {
    case NodeClass::Internal: return "internal";
    case NodeClass::ExternalTest: return "external_test";
    case NodeClass::FinalConcept: return "final_concept";
  }
  return "";
}

std::optional<NodeClass> parse_node_class(std::string_view name) {
  for (NodeClass c : {NodeClass::Internal, NodeClass::ExternalTest,
                      NodeClass::FinalConcept}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

NodeClass LinkGraph::class_of(const CaptureId& id) const {
  auto it = node_classes.find(id);
  return it == node_classes.end() ? NodeClass::Internal : it->second;
}

std::optional<CaptureId> LinkGraph::final_concept() const {
  for (const auto& [id, cls] : node_classes) {
    if (cls == NodeClass::FinalConcept) return id;
  }
  return std::nullopt;
}

std::set<CaptureId> LinkGraph::nodes() const {
  std::set<CaptureId> out;
  for (const auto& [id, cls] : node_classes) out.insert(id);
  for (const auto& [from, to] : edges) {
    out.insert(from);
    out.insert(to);
  }
  return out;
}

namespace {

std::size_t require_member(const ChronologicalIndex& members,
                           const CaptureId& id) {
  auto rank = members.rank(id);
  if (!rank) {
    throw Error(ErrorCode::kNotFound, "capture " + id + " is not a project member",
                {id});
  }
  return *rank;
}

}  // namespace

LinkGraph add_link(LinkGraph graph, const ChronologicalIndex& members,
                   const CaptureId& from, const CaptureId& to) {
  const std::size_t from_rank = require_member(members, from);
  const std::size_t to_rank = require_member(members, to);
  if (from_rank >= to_rank) {
    throw Error(ErrorCode::kChronology, "edge must point forward in time",
                {from + " -> " + to});
  }
  graph.edges.emplace(from, to);
  return graph;
}

LinkGraph set_node_class(LinkGraph graph, const ChronologicalIndex& members,
                         const CaptureId& id, NodeClass cls) {
  require_member(members, id);
  if (cls == NodeClass::FinalConcept) {
    auto current = graph.final_concept();
    if (current && *current != id) {
      throw Error(ErrorCode::kConflict,
                  "project already has a final concept: " + *current, {id});
    }
  }
  if (cls == NodeClass::Internal) {
    graph.node_classes.erase(id);
  } else {
    graph.node_classes[id] = cls;
  }
  return graph;
}

std::vector<std::string> validate_graph(const LinkGraph& graph,
                                        const ChronologicalIndex& members) {
  std::vector<std::string> out;
  int finals = 0;
  for (const auto& [id, cls] : graph.node_classes) {
    if (!members.contains(id)) out.push_back("node " + id + " is not a project member");
    if (cls == NodeClass::FinalConcept) ++finals;
  }
  if (finals > 1) out.push_back("more than one final concept node");
  for (const auto& [from, to] : graph.edges) {
    auto rf = members.rank(from);
    auto rt = members.rank(to);
    if (!rf) out.push_back("edge endpoint " + from + " is not a project member");
    if (!rt) out.push_back("edge endpoint " + to + " is not a project member");
    if (rf && rt && *rf >= *rt)
      out.push_back("edge must point forward in time: " + from + " -> " + to);
  }
  return out;
}

std::map<CaptureId, bool> reachability(const LinkGraph& graph) {
  std::map<CaptureId, bool> out;
  for (const auto& id : graph.nodes()) out[id] = false;
  auto final_node = graph.final_concept();
  if (!final_node) return out;

  // Walk edges backwards from the final concept.
  std::map<CaptureId, std::vector<CaptureId>> incoming;
  for (const auto& [from, to] : graph.edges) incoming[to].push_back(from);

  std::deque<CaptureId> queue{*final_node};
  out[*final_node] = true;
  while (!queue.empty()) {
    CaptureId id = std::move(queue.front());
    queue.pop_front();
    for (const auto& pred : incoming[id]) {
      if (!out[pred]) {
        out[pred] = true;
        queue.push_back(pred);
      }
    }
  }
  return out;
}

}  // namespace protobooth
