#include "atlas/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"

namespace atlas {

std::vector<AssociationCandidate> load_associations(std::istream& in, const KeywordSet& keywords,
                                                    const AliasTable& aliases) {
  csv::Reader reader(in, "keyword_a,keyword_b,accepted,note");
  std::vector<AssociationCandidate> out;
  std::map<std::pair<KeywordId, KeywordId>, std::size_t> seen_at;
  while (auto row = reader.next()) {
    auto& f = row->fields;
    auto resolve = [&](const std::string& raw) {
      std::string label;
      try {
        label = normalize_keyword(raw, aliases);
      } catch (const NormalizationError&) {
        throw AssociationError("line " + std::to_string(row->line) + ": empty keyword label");
      }
      auto id = keywords.find(label);
      if (!id) throw AssociationError("line " + std::to_string(row->line) + ": unknown keyword '" + label + "'");
      return *id;
    };
    const auto a = resolve(f[0]);
    const auto b = resolve(f[1]);
    if (a == b) throw AssociationError("line " + std::to_string(row->line) + ": keyword paired with itself");
    bool accepted;
    if (f[2] == "true") {
      accepted = true;
    } else if (f[2] == "false") {
      accepted = false;
    } else {
      throw ParseError(row->line, "accepted must be 'true' or 'false', got '" + f[2] + "'");
    }
    const auto key = std::minmax(a, b);
    auto [it, inserted] = seen_at.emplace(std::pair{key.first, key.second}, row->line);
    if (!inserted) {
      throw AssociationError("duplicate association '" + keywords[key.first].canonical + "' / '" +
                             keywords[key.second].canonical + "' on lines " + std::to_string(it->second) + " and " +
                             std::to_string(row->line));
    }
    out.push_back({key.first, key.second, accepted, std::move(f[3])});
  }
  return out;
}

std::vector<KeywordPair> candidate_pairs(std::span<const AssociationCandidate> allowlist) {
  std::vector<KeywordPair> pairs;
  pairs.reserve(allowlist.size());
  for (const auto& c : allowlist) pairs.emplace_back(c.keyword_a, c.keyword_b);
  return pairs;
}

KeywordGraph::KeywordGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end(), [](const GraphNode& x, const GraphNode& y) { return x.id < y.id; });
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) throw ContractError("duplicate graph node");
  }
  for (auto& e : edges_) {
    if (e.a == e.b) throw ContractError("keyword graph may not contain self-loops");
    if (e.b < e.a) std::swap(e.a, e.b);
    if (!(e.weight > 0)) throw ContractError("keyword graph edge weights must be positive");
    if (!index_.contains(e.a) || !index_.contains(e.b)) throw ContractError("edge endpoint is not a graph node");
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const GraphEdge& x, const GraphEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].a == edges_[i - 1].a && edges_[i].b == edges_[i - 1].b) throw ContractError("duplicate graph edge");
  }
  std::vector<WeightedEdge> w;
  w.reserve(edges_.size());
  for (const auto& e : edges_) {
    w.push_back({static_cast<std::uint32_t>(index_.at(e.a)), static_cast<std::uint32_t>(index_.at(e.b)), e.weight});
  }
  weighted_ = WeightedGraph(nodes_.size(), w);
}

std::optional<std::size_t> KeywordGraph::index_of(KeywordId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

KeywordGraph KeywordGraph::induced(std::span<const std::size_t> node_indices) const {
  std::vector<GraphNode> nodes;
  std::map<KeywordId, bool> keep;
  for (auto i : node_indices) {
    nodes.push_back(nodes_.at(i));
    keep[nodes_[i].id] = true;
  }
  std::vector<GraphEdge> edges;
  for (const auto& e : edges_) {
    if (keep.contains(e.a) && keep.contains(e.b)) edges.push_back(e);
  }
  return KeywordGraph(std::move(nodes), std::move(edges));
}

BuildResult build_graph(const KeywordSet& keywords, const std::map<KeywordId, double>& scores,
                        const HitStore& pair_hits, std::span<const AssociationCandidate> allowlist) {
  BuildResult result;
  std::vector<GraphEdge> edges;
  std::map<KeywordId, bool> incident;
  std::map<KeywordId, std::int64_t> single_hits;
  for (const auto& kw : keywords.all()) {
    if (auto rec = pair_hits.find(QueryExpression::single(kw.canonical).render())) single_hits[kw.id] = rec->count;
  }
  for (const auto& c : allowlist) {
    if (!c.accepted) continue;
    const auto query = pair_query(keywords, {c.keyword_a, c.keyword_b}).render();
    auto rec = pair_hits.find(query);
    if (!rec) {
      throw BuildError("accepted pair '" + keywords[c.keyword_a].canonical + "' / '" +
                       keywords[c.keyword_b].canonical + "' has no pair count in the hit store (query " + query + ")");
    }
    auto score_of = [&](KeywordId id) {
      auto it = scores.find(id);
      if (it == scores.end()) throw BuildError("no relevance score for '" + keywords[id].canonical + "'");
      return it->second;
    };
    const double weight = static_cast<double>(rec->count) * score_of(c.keyword_a) * score_of(c.keyword_b);
    const auto ha = single_hits.find(c.keyword_a);
    const auto hb = single_hits.find(c.keyword_b);
    if (ha != single_hits.end() && hb != single_hits.end() && rec->count > std::min(ha->second, hb->second)) {
      result.warnings.push_back("pair " + query + " has more hits (" + std::to_string(rec->count) +
                                ") than one of its keywords alone");
    }
    if (!(weight > 0)) continue;
    edges.push_back({c.keyword_a, c.keyword_b, rec->count, weight});
    incident[c.keyword_a] = true;
    incident[c.keyword_b] = true;
  }
  std::vector<GraphNode> nodes;
  for (const auto& kw : keywords.all()) {
    if (!incident.contains(kw.id)) {
      result.isolated.push_back(kw.id);
      continue;
    }
    nodes.push_back({kw.id, kw.canonical, scores.at(kw.id), kw.mention_count});
  }
  result.graph = KeywordGraph(std::move(nodes), std::move(edges));
  return result;
}

void write_edges_csv(std::ostream& out, const KeywordGraph& graph) {
  out << "a,b,pair_hits,weight\n";
  const auto nodes = graph.nodes();
  for (const auto& e : graph.edges()) {
    out << csv::quote(nodes[*graph.index_of(e.a)].label) << ',' << csv::quote(nodes[*graph.index_of(e.b)].label)
        << ',' << e.pair_hits << ',' << csv::format_double(e.weight) << '\n';
  }
}

void write_nodes_csv(std::ostream& out, const KeywordGraph& graph) {
  out << "id,keyword,score,mentions\n";
  for (const auto& n : graph.nodes()) {
    out << to_index(n.id) << ',' << csv::quote(n.label) << ',' << csv::format_double(n.score) << ',' << n.mentions
        << '\n';
  }
}

KeywordGraph read_graph_csv(std::istream& nodes_in, std::istream& edges_in) {
  std::vector<GraphNode> nodes;
  std::map<std::string, KeywordId, std::less<>> by_label;
  csv::Reader nr(nodes_in, "id,keyword,score,mentions");
  while (auto row = nr.next()) {
    const auto& f = row->fields;
    GraphNode n{static_cast<KeywordId>(csv::parse_int(f[0], row->line)), f[1], csv::parse_double(f[2], row->line),
                static_cast<int>(csv::parse_int(f[3], row->line))};
    by_label[n.label] = n.id;
    nodes.push_back(std::move(n));
  }
  std::vector<GraphEdge> edges;
  csv::Reader er(edges_in, "a,b,pair_hits,weight");
  while (auto row = er.next()) {
    const auto& f = row->fields;
    auto a = by_label.find(f[0]);
    auto b = by_label.find(f[1]);
    if (a == by_label.end() || b == by_label.end()) throw ParseError(row->line, "edge endpoint is not a listed node");
    edges.push_back({a->second, b->second, csv::parse_int(f[2], row->line), csv::parse_double(f[3], row->line)});
  }
  return KeywordGraph(std::move(nodes), std::move(edges));
}

}  // namespace atlas
