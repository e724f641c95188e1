#include <vector>

#include "atlas/error.hpp"
#include "atlas/kernels.hpp"

namespace atlas::kernels {

namespace {

// Weight from u into its own community, with a self-loop counted twice.
double internal_weight(const WeightedGraph& g, std::span<const std::uint32_t> membership, std::size_t u) noexcept {
  const auto nb = g.neighbors(u);
  const auto w = g.weights(u);
  double s = 0;
  for (std::size_t k = 0; k < nb.size(); ++k) {
    if (membership[nb[k]] != membership[u]) continue;
    s += nb[k] == u ? 2.0 * w[k] : w[k];
  }
  return s;
}

double reduce(const WeightedGraph& g, std::span<const std::uint32_t> membership, std::span<const double> internal,
              double resolution) {
  const double W = 2.0 * g.total_weight();
  if (W <= 0) return 0.0;
  const std::size_t n = g.node_count();
  std::vector<double> in(n, 0.0), tot(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    in[membership[u]] += internal[u];
    tot[membership[u]] += g.degree(u);
  }
  double q = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (tot[c] == 0 && in[c] == 0) continue;
    const double share = tot[c] / W;
    q += in[c] / W - resolution * share * share;
  }
  return q;
}

void check(const WeightedGraph& g, std::span<const std::uint32_t> membership) {
  if (membership.size() != g.node_count()) throw ContractError("membership must cover every node");
  for (auto c : membership) {
    if (c >= g.node_count()) throw ContractError("community id out of range");
  }
}

}  // namespace

double modularity_serial(const WeightedGraph& g, std::span<const std::uint32_t> membership, double resolution) {
  check(g, membership);
  std::vector<double> internal(g.node_count());
  for (std::size_t u = 0; u < g.node_count(); ++u) internal[u] = internal_weight(g, membership, u);
  return reduce(g, membership, internal, resolution);
}

double modularity_parallel(const WeightedGraph& g, std::span<const std::uint32_t> membership, double resolution) {
  check(g, membership);
  std::vector<double> internal(g.node_count());
  const auto n = static_cast<std::ptrdiff_t>(g.node_count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t u = 0; u < n; ++u) {
    internal[static_cast<std::size_t>(u)] = internal_weight(g, membership, static_cast<std::size_t>(u));
  }
  return reduce(g, membership, internal, resolution);
}

}  // namespace atlas::kernels
