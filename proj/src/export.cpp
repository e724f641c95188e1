#include "atlas/export.hpp"

#include <json.hpp>

#include "atlas/error.hpp"

namespace atlas {

namespace {

using Json = nlohmann::ordered_json;

const nlohmann::json& field(const nlohmann::json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) throw ExportError("explorer export: missing field '" + where + name + "'");
  return obj.at(name);
}

template <typename T>
T get(const nlohmann::json& obj, const char* name, const std::string& where) {
  const auto& v = field(obj, name, where);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ExportError("explorer export: field '" + where + name + "' has the wrong type");
  }
}

}  // namespace

ExplorerExport make_explorer_export(const KeywordGraph& graph, const LayoutResult& layout,
                                    const Partition& partition, ExportMeta meta) {
  if (layout.positions.size() != graph.node_count() || partition.assignment.size() != graph.node_count()) {
    throw ExportError("explorer export: layout, partition and graph cover different node sets");
  }
  ExplorerExport out;
  out.meta = std::move(meta);
  for (const auto& node : graph.nodes()) {
    const auto pos = layout.positions.find(node.id);
    const auto comm = partition.assignment.find(node.id);
    if (pos == layout.positions.end() || comm == partition.assignment.end()) {
      throw ExportError("explorer export: keyword '" + node.label + "' is missing from the layout or partition");
    }
    out.nodes.push_back({to_index(node.id), node.label, node.score, node.mentions, comm->second, pos->second.x,
                         pos->second.y});
  }
  for (const auto& e : graph.edges()) out.edges.push_back({to_index(e.a), to_index(e.b), e.weight, e.pair_hits});
  return out;
}

std::string export_explorer_json(const ExplorerExport& data) {
  Json doc;
  doc["meta"] = Json{{"generated_at", data.meta.generated_at},
                     {"seed", data.meta.seed},
                     {"resolution", data.meta.resolution},
                     {"boost_function", data.meta.boost_function},
                     {"q", data.meta.q}};
  auto& nodes = doc["nodes"] = Json::array();
  for (const auto& n : data.nodes) {
    nodes.push_back(Json{{"id", n.id},
                         {"label", n.label},
                         {"score", n.score},
                         {"mentions", n.mentions},
                         {"community", n.community},
                         {"x", n.x},
                         {"y", n.y}});
  }
  auto& edges = doc["edges"] = Json::array();
  for (const auto& e : data.edges) {
    edges.push_back(Json{{"source", e.source}, {"target", e.target}, {"weight", e.weight}, {"pair_hits", e.pair_hits}});
  }
  return doc.dump(2) + "\n";
}

ExplorerExport parse_explorer_json(std::string_view text) {
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ExportError("explorer export: not valid JSON");
  ExplorerExport out;
  const auto& meta = field(doc, "meta", "");
  out.meta.generated_at = get<std::string>(meta, "generated_at", "meta.");
  out.meta.seed = get<std::uint64_t>(meta, "seed", "meta.");
  out.meta.resolution = get<double>(meta, "resolution", "meta.");
  out.meta.boost_function = get<std::string>(meta, "boost_function", "meta.");
  out.meta.q = get<double>(meta, "q", "meta.");

  const auto& nodes = field(doc, "nodes", "");
  if (!nodes.is_array()) throw ExportError("explorer export: field 'nodes' has the wrong type");
  for (const auto& n : nodes) {
    out.nodes.push_back({get<std::uint32_t>(n, "id", "nodes[]."), get<std::string>(n, "label", "nodes[]."),
                         get<double>(n, "score", "nodes[]."), get<int>(n, "mentions", "nodes[]."),
                         get<std::uint32_t>(n, "community", "nodes[]."), get<double>(n, "x", "nodes[]."),
                         get<double>(n, "y", "nodes[].")});
  }
  const auto& edges = field(doc, "edges", "");
  if (!edges.is_array()) throw ExportError("explorer export: field 'edges' has the wrong type");
  for (const auto& e : edges) {
    out.edges.push_back({get<std::uint32_t>(e, "source", "edges[]."), get<std::uint32_t>(e, "target", "edges[]."),
                         get<double>(e, "weight", "edges[]."), get<std::int64_t>(e, "pair_hits", "edges[].")});
  }
  return out;
}

}  // namespace atlas
