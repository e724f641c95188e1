#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace atlas {

struct WeightedEdge {
  std::uint32_t u;
  std::uint32_t v;
  double weight;
};

// Undirected weighted graph in adjacency-array form. Self-loops are allowed
// (community aggregation produces them) and are stored once in their node's
// row; a loop of weight w adds 2w to that node's degree.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  // Parallel edges are merged by summing their weights.
  WeightedGraph(std::size_t node_count, std::span<const WeightedEdge> edges);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::span<const std::uint32_t> neighbors(std::size_t u) const noexcept {
    return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
  }
  std::span<const double> weights(std::size_t u) const noexcept {
    return {weights_.data() + offsets_[u], weights_.data() + offsets_[u + 1]};
  }
  double degree(std::size_t u) const noexcept { return degrees_[u]; }
  std::span<const double> degrees() const noexcept { return degrees_; }
  // Sum of edge weights, each undirected edge (and loop) counted once.
  double total_weight() const noexcept { return total_weight_; }
  double max_weight() const noexcept { return max_weight_; }

  std::vector<WeightedEdge> edges() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<double> weights_;
  std::vector<double> degrees_;
  std::size_t edge_count_ = 0;
  double total_weight_ = 0;
  double max_weight_ = 0;
};

}  // namespace atlas
