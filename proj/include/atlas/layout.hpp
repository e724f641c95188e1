#pragma once

// Spring-electrical layout and the community-grouped arrangement.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "atlas/communities.hpp"
#include "atlas/graph.hpp"
#include "atlas/kernels.hpp"

namespace atlas {

using kernels::Vec2;

enum class ForceKernel { serial, parallel, barnes_hut };

std::string_view to_string(ForceKernel kernel) noexcept;
ForceKernel parse_force_kernel(std::string_view name);

struct LayoutParams {
  double spring = 1.0;
  double natural_length = 1.0;
  double repulsion = 1.0;
  // Multiplier on the quasi-Newton direction; grown by step_growth after an
  // accepted move (up to max_step), halved after a rejected one.
  double initial_step = 1.0;
  double step_growth = 2.0;
  double max_step = 1.0;
  // Per-node displacement cap, starting at natural_length * sqrt(n),
  // multiplied by `cooling` every iteration and floored at
  // min_temperature * natural_length.
  double cooling = 0.995;
  double min_temperature = 1.0;
  int max_iterations = 10000;
  double tolerance = 1e-3;  // on the largest per-node net force
  ForceKernel kernel = ForceKernel::serial;
  double theta = 0.6;  // Barnes-Hut opening angle
};

struct Bounds {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  double width() const noexcept { return max_x - min_x; }
  double height() const noexcept { return max_y - min_y; }
  bool overlaps(const Bounds& o) const noexcept {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
};

struct LayoutResult {
  std::map<KeywordId, Vec2> positions;
  std::uint64_t seed = 0;
  int iterations = 0;
  double residual = 0;
  Bounds bounds;
  bool converged = false;
};

// Energy after each accepted iteration (starting with the initial energy).
struct LayoutTrace {
  std::vector<double> energies;
  int rejected = 0;
};

// Index-space core. Positions start uniformly random in a square of side
// natural_length * sqrt(n) and are returned centred on their centroid.
std::vector<Vec2> spring_positions(const WeightedGraph& g, std::uint64_t seed, const LayoutParams& params,
                                   int* iterations, double* residual, LayoutTrace* trace = nullptr);

// Edge weights are divided by the largest weight before the forces see them.
LayoutResult spring_layout(const KeywordGraph& graph, std::uint64_t seed, const LayoutParams& params = {},
                           LayoutTrace* trace = nullptr);

// Each community laid out on its own (seed + community id), then placed on a
// ceil(sqrt(k))-column grid in community order, anchored at community 0.
LayoutResult grouped_layout(const KeywordGraph& graph, const Partition& partition, std::uint64_t seed,
                            const LayoutParams& params = {});

// Bounding box per community under `layout`.
std::vector<Bounds> community_bounds(const KeywordGraph& graph, const Partition& partition,
                                     const LayoutResult& layout);

Bounds bounds_of(const std::map<KeywordId, Vec2>& positions);

// `keyword,x,y` plus a JSON sidecar with seed, iterations, residual, converged.
void write_layout_csv(std::ostream& out, const KeywordGraph& graph, const LayoutResult& layout);
std::string layout_metadata_json(const LayoutResult& layout);
LayoutResult read_layout(std::istream& csv_in, std::string_view metadata_json, const KeywordGraph& graph);

}  // namespace atlas
