#pragma once

// Louvain modularity maximization.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "atlas/graph.hpp"
#include "atlas/kernels.hpp"
#include "atlas/weighted_graph.hpp"

namespace atlas {

struct Partition {
  std::map<KeywordId, std::uint32_t> assignment;  // dense ids in [0, community_count)
  std::uint32_t community_count = 0;
  double q = 0;
  double resolution = 1.0;
  std::uint64_t seed = 0;
};

struct LouvainOptions {
  double resolution = 1.0;
  double gain_tolerance = 1e-12;  // on the modularity gain of a single move
};

struct LouvainTrace {
  int levels = 0;
  int passes = 0;
  std::size_t moves = 0;
  bool degenerate = false;  // graph without weight: singletons, q = 0
};

// Index-space core. Returns a dense membership vector whose community ids are
// numbered by first appearance in node order.
std::vector<std::uint32_t> louvain_membership(const WeightedGraph& g, std::uint64_t seed,
                                              const LouvainOptions& options = {}, LouvainTrace* trace = nullptr);

// Relabels to dense ids in order of first appearance.
std::uint32_t compact_membership(std::span<std::uint32_t> membership);

// Uses partition.resolution. Every graph node must be assigned.
double modularity(const KeywordGraph& graph, const Partition& partition,
                  kernels::Execution exec = kernels::Execution::serial);

Partition louvain(const KeywordGraph& graph, std::uint64_t seed, double resolution = 1.0,
                  LouvainTrace* trace = nullptr);

// Community membership in node order of `graph`.
std::vector<std::uint32_t> membership_of(const KeywordGraph& graph, const Partition& partition);

// `keyword,community`
void write_partition_csv(std::ostream& out, const KeywordGraph& graph, const Partition& partition);
// {"seed", "resolution", "q", "community_count"}
std::string partition_metadata_json(const Partition& partition);
Partition read_partition(std::istream& csv_in, std::string_view metadata_json, const KeywordGraph& graph);

}  // namespace atlas
