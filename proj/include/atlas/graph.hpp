#pragma once

// Curated keyword-association network.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atlas/catalog.hpp"
#include "atlas/openalex.hpp"
#include "atlas/weighted_graph.hpp"

namespace atlas {

struct AssociationCandidate {
  KeywordId keyword_a;  // always the smaller id
  KeywordId keyword_b;
  bool accepted = false;
  std::string note;
};

// `keyword_a,keyword_b,accepted,note`, accepted in {true,false}. Labels are
// normalized through `aliases` and must exist in `keywords`.
std::vector<AssociationCandidate> load_associations(std::istream& in, const KeywordSet& keywords,
                                                    const AliasTable& aliases = {});

std::vector<KeywordPair> candidate_pairs(std::span<const AssociationCandidate> allowlist);

struct GraphNode {
  KeywordId id;
  std::string label;
  double score = 0;
  int mentions = 0;
};

struct GraphEdge {
  KeywordId a;  // a < b
  KeywordId b;
  std::int64_t pair_hits = 0;
  double weight = 0;
};

// Simple undirected graph; nodes sorted by id, edges sorted by (a, b).
class KeywordGraph {
 public:
  KeywordGraph() = default;
  KeywordGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

  std::span<const GraphNode> nodes() const noexcept { return nodes_; }
  std::span<const GraphEdge> edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  // Position of `id` in nodes(), if present.
  std::optional<std::size_t> index_of(KeywordId id) const;
  // Same topology in index space, for the numeric kernels.
  const WeightedGraph& weighted() const noexcept { return weighted_; }
  // Induced subgraph on the listed node indices (kept in the given order).
  KeywordGraph induced(std::span<const std::size_t> node_indices) const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::map<KeywordId, std::size_t> index_;
  WeightedGraph weighted_;
};

struct BuildResult {
  KeywordGraph graph;
  std::vector<KeywordId> isolated;  // keywords with no surviving edge
  std::vector<std::string> warnings;
};

// weight(i, j) = pair_hits(i, j) * score(i) * score(j) over accepted pairs;
// zero-weight edges are dropped. Missing pair counts raise BuildError.
BuildResult build_graph(const KeywordSet& keywords, const std::map<KeywordId, double>& scores,
                        const HitStore& pair_hits, std::span<const AssociationCandidate> allowlist);

// `a,b,pair_hits,weight` with keyword labels.
void write_edges_csv(std::ostream& out, const KeywordGraph& graph);
// `id,keyword,score,mentions`
void write_nodes_csv(std::ostream& out, const KeywordGraph& graph);
KeywordGraph read_graph_csv(std::istream& nodes, std::istream& edges);

}  // namespace atlas
