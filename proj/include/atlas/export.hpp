#pragma once

// Graph export read by the browser explorer. Field names are a fixed contract:
//   meta  {generated_at, seed, resolution, boost_function, q}
//   nodes [{id, label, score, mentions, community, x, y}]
//   edges [{source, target, weight, pair_hits}]

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/communities.hpp"
#include "atlas/graph.hpp"
#include "atlas/layout.hpp"

namespace atlas {

struct ExportMeta {
  std::string generated_at;  // "YYYY-MM-DDTHH:MM:SSZ"
  std::uint64_t seed = 0;
  double resolution = 1.0;
  std::string boost_function;
  double q = 0;
  friend bool operator==(const ExportMeta&, const ExportMeta&) = default;
};

struct ExplorerNode {
  std::uint32_t id = 0;
  std::string label;
  double score = 0;
  int mentions = 0;
  std::uint32_t community = 0;
  double x = 0;
  double y = 0;
  friend bool operator==(const ExplorerNode&, const ExplorerNode&) = default;
};

struct ExplorerEdge {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  double weight = 0;
  std::int64_t pair_hits = 0;
  friend bool operator==(const ExplorerEdge&, const ExplorerEdge&) = default;
};

struct ExplorerExport {
  ExportMeta meta;
  std::vector<ExplorerNode> nodes;  // by id
  std::vector<ExplorerEdge> edges;  // by (source, target)
  friend bool operator==(const ExplorerExport&, const ExplorerExport&) = default;
};

// Throws ExportError when layout or partition do not cover exactly the graph's nodes.
ExplorerExport make_explorer_export(const KeywordGraph& graph, const LayoutResult& layout,
                                    const Partition& partition, ExportMeta meta);

std::string export_explorer_json(const ExplorerExport& data);
// Throws ExportError naming the first missing or mistyped field.
ExplorerExport parse_explorer_json(std::string_view text);

}  // namespace atlas
