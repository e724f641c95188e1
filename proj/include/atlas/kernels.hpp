#pragma once

// Data-parallel inner loops of the layout and community code.
//
// Each kernel comes as a serial reference and an OpenMP variant. The OpenMP
// variants partition work by node and give every node its own accumulator,
// walked in the same order as the serial loop, so both produce bit-identical
// results regardless of thread count. Only the Barnes-Hut force kernel is an
// approximation and does not match the exact kernels bit for bit.

#include <cstdint>
#include <span>

#include "atlas/weighted_graph.hpp"

namespace atlas::kernels {

enum class Execution { serial, parallel };

struct Vec2 {
  double x = 0;
  double y = 0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Spring-electrical force model. For nodes at distance d:
//   attraction along an edge of weight w:  spring * w * d^2 / natural_length
//   repulsion between every pair:          repulsion * natural_length^3 / d^2
// which are the negative gradients of the energy
//   sum_edges spring * w * d^3 / (3 natural_length) + sum_pairs repulsion * natural_length^3 / d.
// Pairs closer than min_distance are treated as exactly min_distance apart along
// a pseudo-random direction derived from (jitter_seed, i, j).
struct ForceModel {
  double spring = 1.0;
  double natural_length = 1.0;
  double repulsion = 1.0;
  double min_distance = 1e-6;
  std::uint64_t jitter_seed = 0;
};

// Writes the net force on each node into `out` (same length as `positions`).
// Self-loops exert no force.
void forces_serial(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                   std::span<Vec2> out);
void forces_parallel(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                     std::span<Vec2> out);
// Quadtree approximation of the repulsive term (opening angle `theta`);
// attraction stays exact.
void forces_barnes_hut(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                       double theta, std::span<Vec2> out);

double energy_serial(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model);
double energy_parallel(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model);
double energy_barnes_hut(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                         double theta);

// Weighted modularity sum_c [ in_c / W - resolution * (tot_c / W)^2 ] with
// W = 2 * total weight, in_c = twice the weight inside c, tot_c = summed degree of c.
// `membership[u]` must be < node_count. Returns 0 for a graph without weight.
double modularity_serial(const WeightedGraph& g, std::span<const std::uint32_t> membership, double resolution);
double modularity_parallel(const WeightedGraph& g, std::span<const std::uint32_t> membership, double resolution);

inline double modularity(const WeightedGraph& g, std::span<const std::uint32_t> membership, double resolution,
                         Execution exec = Execution::serial) {
  return exec == Execution::parallel ? modularity_parallel(g, membership, resolution)
                                     : modularity_serial(g, membership, resolution);
}

// Whether the OpenMP variants were compiled with OpenMP enabled.
bool openmp_enabled() noexcept;
int max_threads() noexcept;

}  // namespace atlas::kernels
