#include "atlas/communities.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"

namespace atlas {

namespace {

// Fisher-Yates with a plain modulo draw, so the order does not depend on the
// standard library's distribution implementation.
void shuffle(std::vector<std::uint32_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

// Phase 1 on one level. Returns true when any node moved.
bool move_nodes(const WeightedGraph& g, std::vector<std::uint32_t>& comm, std::mt19937_64& rng,
                const LouvainOptions& opt, double m2, LouvainTrace& trace) {
  const std::size_t n = g.node_count();
  std::vector<double> tot(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) tot[comm[u]] += g.degree(u);

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  shuffle(order, rng);

  std::vector<double> link(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;
  bool any = false;
  for (;;) {
    ++trace.passes;
    bool moved = false;
    for (const auto u : order) {
      const auto own = comm[u];
      const double ku = g.degree(u);
      touched.clear();
      touched.push_back(own);
      seen[own] = 1;
      const auto nb = g.neighbors(u);
      const auto w = g.weights(u);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        if (nb[k] == u) continue;
        const auto c = comm[nb[k]];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        link[c] += w[k];
      }
      tot[own] -= ku;
      // Gain of inserting u into c, in modularity units.
      auto gain = [&](std::uint32_t c) { return 2.0 * (link[c] - opt.resolution * tot[c] * ku / m2) / m2; };
      const double stay = gain(own);
      std::uint32_t best = own;
      std::sort(touched.begin(), touched.end());
      bool have_other = false;
      double other_gain = 0;
      std::uint32_t other = own;
      for (const auto c : touched) {
        if (c == own) continue;
        const double gc = gain(c);
        if (!have_other || gc > other_gain) {
          have_other = true;
          other_gain = gc;
          other = c;
        }
      }
      if (have_other && other_gain - stay > opt.gain_tolerance) best = other;
      tot[best] += ku;
      comm[u] = best;
      for (const auto c : touched) {
        link[c] = 0.0;
        seen[c] = 0;
      }
      if (best != own) {
        moved = true;
        ++trace.moves;
      }
    }
    if (!moved) break;
    any = true;
  }
  return any;
}

}  // namespace

std::uint32_t compact_membership(std::span<std::uint32_t> membership) {
  std::map<std::uint32_t, std::uint32_t> relabel;
  for (auto& c : membership) {
    auto [it, inserted] = relabel.emplace(c, static_cast<std::uint32_t>(relabel.size()));
    c = it->second;
  }
  return static_cast<std::uint32_t>(relabel.size());
}

std::vector<std::uint32_t> louvain_membership(const WeightedGraph& g, std::uint64_t seed,
                                              const LouvainOptions& options, LouvainTrace* trace_out) {
  if (!(options.resolution > 0)) throw ContractError("resolution must be positive");
  for (const auto& e : g.edges()) {
    if (!(e.weight > 0)) throw ContractError("louvain needs strictly positive edge weights");
  }
  LouvainTrace trace;
  const std::size_t n = g.node_count();
  std::vector<std::uint32_t> membership(n);
  std::iota(membership.begin(), membership.end(), 0u);
  const double m2 = 2.0 * g.total_weight();
  if (n == 0 || m2 <= 0) {
    trace.degenerate = n > 0;
    if (trace_out) *trace_out = trace;
    return membership;
  }

  std::mt19937_64 rng(seed);
  WeightedGraph level = g;
  for (;;) {
    ++trace.levels;
    std::vector<std::uint32_t> comm(level.node_count());
    std::iota(comm.begin(), comm.end(), 0u);
    if (!move_nodes(level, comm, rng, options, m2, trace)) break;
    const auto count = compact_membership(comm);
    for (auto& c : membership) c = comm[c];
    std::vector<WeightedEdge> aggregated;
    for (const auto& e : level.edges()) aggregated.push_back({comm[e.u], comm[e.v], e.weight});
    level = WeightedGraph(count, aggregated);
    if (count == 1) break;
  }
  compact_membership(membership);
  if (trace_out) *trace_out = trace;
  return membership;
}

std::vector<std::uint32_t> membership_of(const KeywordGraph& graph, const Partition& partition) {
  std::vector<std::uint32_t> membership;
  membership.reserve(graph.node_count());
  for (const auto& node : graph.nodes()) {
    auto it = partition.assignment.find(node.id);
    if (it == partition.assignment.end()) {
      throw ContractError("partition does not assign keyword '" + node.label + "'");
    }
    if (it->second >= graph.node_count()) throw ContractError("community id out of range");
    membership.push_back(it->second);
  }
  return membership;
}

double modularity(const KeywordGraph& graph, const Partition& partition, kernels::Execution exec) {
  if (partition.assignment.size() != graph.node_count()) {
    // Extra entries are as much a contract breach as missing ones.
    for (const auto& [id, c] : partition.assignment) {
      if (!graph.index_of(id)) throw ContractError("partition assigns a keyword that is not in the graph");
    }
  }
  const auto membership = membership_of(graph, partition);
  return kernels::modularity(graph.weighted(), membership, partition.resolution, exec);
}

Partition louvain(const KeywordGraph& graph, std::uint64_t seed, double resolution, LouvainTrace* trace) {
  if (graph.empty()) throw ContractError("louvain needs at least one node");
  LouvainOptions options;
  options.resolution = resolution;
  const auto membership = louvain_membership(graph.weighted(), seed, options, trace);
  Partition p;
  p.seed = seed;
  p.resolution = resolution;
  for (std::size_t i = 0; i < membership.size(); ++i) p.assignment[graph.nodes()[i].id] = membership[i];
  p.community_count = membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
  p.q = kernels::modularity(graph.weighted(), membership, resolution);
  return p;
}

void write_partition_csv(std::ostream& out, const KeywordGraph& graph, const Partition& partition) {
  out << "keyword,community\n";
  for (const auto& node : graph.nodes()) {
    out << csv::quote(node.label) << ',' << partition.assignment.at(node.id) << '\n';
  }
}

std::string partition_metadata_json(const Partition& partition) {
  nlohmann::ordered_json doc;
  doc["seed"] = partition.seed;
  doc["resolution"] = partition.resolution;
  doc["q"] = partition.q;
  doc["community_count"] = partition.community_count;
  return doc.dump(2) + "\n";
}

Partition read_partition(std::istream& csv_in, std::string_view metadata_json, const KeywordGraph& graph) {
  Partition p;
  const auto meta = nlohmann::json::parse(metadata_json, nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) throw ConfigError("partition metadata is not a JSON object");
  try {
    p.seed = meta.at("seed").get<std::uint64_t>();
    p.resolution = meta.at("resolution").get<double>();
    p.q = meta.at("q").get<double>();
    p.community_count = meta.at("community_count").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("partition metadata: ") + e.what());
  }
  std::map<std::string, KeywordId, std::less<>> by_label;
  for (const auto& n : graph.nodes()) by_label[n.label] = n.id;
  csv::Reader reader(csv_in, "keyword,community");
  while (auto row = reader.next()) {
    auto it = by_label.find(row->fields[0]);
    if (it == by_label.end()) throw ParseError(row->line, "keyword '" + row->fields[0] + "' is not a graph node");
    const auto c = csv::parse_int(row->fields[1], row->line);
    if (c < 0 || c >= static_cast<long long>(p.community_count)) throw ParseError(row->line, "community id out of range");
    p.assignment[it->second] = static_cast<std::uint32_t>(c);
  }
  membership_of(graph, p);
  return p;
}

}  // namespace atlas
