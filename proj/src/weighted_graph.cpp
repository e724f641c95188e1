#include "atlas/weighted_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "atlas/error.hpp"

namespace atlas {

WeightedGraph::WeightedGraph(std::size_t node_count, std::span<const WeightedEdge> edges) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> merged;
  for (const auto& e : edges) {
    if (e.u >= node_count || e.v >= node_count) throw ContractError("edge endpoint out of range");
    if (!std::isfinite(e.weight)) throw ContractError("edge weight must be finite");
    merged[{std::min(e.u, e.v), std::max(e.u, e.v)}] += e.weight;
  }

  std::vector<std::size_t> row_size(node_count, 0);
  for (const auto& [key, w] : merged) {
    ++row_size[key.first];
    if (key.first != key.second) ++row_size[key.second];
  }
  offsets_.assign(node_count + 1, 0);
  for (std::size_t u = 0; u < node_count; ++u) offsets_[u + 1] = offsets_[u] + row_size[u];
  targets_.resize(offsets_.back());
  weights_.resize(offsets_.back());
  degrees_.assign(node_count, 0.0);

  // `merged` iterates in (min, max) order: row u first receives its lower
  // neighbours, then its loop, then its higher neighbours, so rows come out sorted.
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [key, w] : merged) {
    const auto [a, b] = key;
    targets_[fill[a]] = b;
    weights_[fill[a]++] = w;
    if (a != b) {
      targets_[fill[b]] = a;
      weights_[fill[b]++] = w;
      degrees_[a] += w;
      degrees_[b] += w;
    } else {
      degrees_[a] += 2 * w;
    }
    total_weight_ += w;
    max_weight_ = std::max(max_weight_, w);
  }
  edge_count_ = merged.size();
}

std::vector<WeightedEdge> WeightedGraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(edge_count_);
  for (std::size_t u = 0; u < node_count(); ++u) {
    auto nb = neighbors(u);
    auto w = weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= u) out.push_back({static_cast<std::uint32_t>(u), nb[k], w[k]});
    }
  }
  return out;
}

}  // namespace atlas
