#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "atlas/error.hpp"
#include "atlas/kernels.hpp"

namespace atlas::kernels {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Unit vector for a coincident pair; antisymmetric in (i, j).
Vec2 jitter_direction(std::uint64_t seed, std::size_t i, std::size_t j) noexcept {
  const auto lo = std::min(i, j);
  const auto hi = std::max(i, j);
  const auto h = splitmix64(seed ^ splitmix64(lo * 0x100000001B3ull + hi));
  const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
  const double sign = i < j ? 1.0 : -1.0;
  return {sign * std::cos(angle), sign * std::sin(angle)};
}

// Separation from j to i as (unit direction, distance), with the coincidence clamp applied.
struct Separation {
  Vec2 unit;
  double distance;
};

Separation separation(const ForceModel& m, std::span<const Vec2> p, std::size_t i, std::size_t j) noexcept {
  const double dx = p[i].x - p[j].x;
  const double dy = p[i].y - p[j].y;
  const double d = std::hypot(dx, dy);
  if (!(d >= m.min_distance)) return {jitter_direction(m.jitter_seed, i, j), m.min_distance};
  return {{dx / d, dy / d}, d};
}

double clamp_distance(const ForceModel& m, const Vec2& a, const Vec2& b) noexcept {
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  return d >= m.min_distance ? d : m.min_distance;
}

Vec2 attraction_on(const WeightedGraph& g, std::span<const Vec2> p, const ForceModel& m, std::size_t i) noexcept {
  Vec2 f;
  const auto nb = g.neighbors(i);
  const auto w = g.weights(i);
  for (std::size_t k = 0; k < nb.size(); ++k) {
    if (nb[k] == i) continue;
    const auto s = separation(m, p, i, nb[k]);
    const double mag = m.spring * w[k] * s.distance * s.distance / m.natural_length;
    f.x -= mag * s.unit.x;
    f.y -= mag * s.unit.y;
  }
  return f;
}

Vec2 exact_force_on(const WeightedGraph& g, std::span<const Vec2> p, const ForceModel& m, std::size_t i) noexcept {
  const double k3 = m.repulsion * m.natural_length * m.natural_length * m.natural_length;
  Vec2 f;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j == i) continue;
    const auto s = separation(m, p, i, j);
    const double mag = k3 / (s.distance * s.distance);
    f.x += mag * s.unit.x;
    f.y += mag * s.unit.y;
  }
  const Vec2 a = attraction_on(g, p, m, i);
  return {f.x + a.x, f.y + a.y};
}

// Energy terms owned by node i: pairs and edges towards higher indices.
double energy_share(const WeightedGraph& g, std::span<const Vec2> p, const ForceModel& m, std::size_t i) noexcept {
  const double k3 = m.repulsion * m.natural_length * m.natural_length * m.natural_length;
  double e = 0;
  for (std::size_t j = i + 1; j < p.size(); ++j) e += k3 / clamp_distance(m, p[i], p[j]);
  const auto nb = g.neighbors(i);
  const auto w = g.weights(i);
  for (std::size_t k = 0; k < nb.size(); ++k) {
    if (nb[k] <= i) continue;
    const double d = clamp_distance(m, p[i], p[nb[k]]);
    e += m.spring * w[k] * d * d * d / (3.0 * m.natural_length);
  }
  return e;
}

void check_shapes(const WeightedGraph& g, std::span<const Vec2> positions, std::span<Vec2> out) {
  if (positions.size() != g.node_count() || out.size() != g.node_count()) {
    throw ContractError("force kernel: position/output length must equal node count");
  }
}

// ---------------------------------------------------------------------------
// Barnes-Hut quadtree over node positions.

class QuadTree {
 public:
  QuadTree(std::span<const Vec2> p) : points_(p) {
    if (p.empty()) return;
    double min_x = p[0].x, max_x = p[0].x, min_y = p[0].y, max_y = p[0].y;
    for (const auto& q : p) {
      min_x = std::min(min_x, q.x);
      max_x = std::max(max_x, q.x);
      min_y = std::min(min_y, q.y);
      max_y = std::max(max_y, q.y);
    }
    const double half = 0.5 * std::max({max_x - min_x, max_y - min_y, 1e-12}) * (1 + 1e-9);
    cells_.emplace_back(Vec2{0.5 * (min_x + max_x), 0.5 * (min_y + max_y)}, half);
    for (std::size_t i = 0; i < p.size(); ++i) insert(0, static_cast<std::uint32_t>(i), 0);
    summarize(0);
  }

  // Visits cells accepted by the opening criterion and leaf bodies; `far(mass, com)`
  // and `near(j)` receive them in a fixed depth-first order.
  template <class Far, class Near>
  void walk(const Vec2& at, double theta, Far&& far, Near&& near) const {
    if (cells_.empty()) return;
    walk_cell(0, at, theta, far, near);
  }

 private:
  static constexpr int kMaxDepth = 48;

  struct Cell {
    Vec2 center;
    double half = 0;
    std::array<std::int32_t, 4> child{-1, -1, -1, -1};
    std::vector<std::uint32_t> bodies;  // only for leaves
    bool leaf = true;
    double mass = 0;
    Vec2 com;

    Cell(Vec2 c, double h) : center(c), half(h) {}
  };

  int quadrant(const Cell& c, const Vec2& q) const noexcept {
    return (q.x >= c.center.x ? 1 : 0) + (q.y >= c.center.y ? 2 : 0);
  }

  void insert(std::size_t cell, std::uint32_t body, int depth) {
    if (cells_[cell].leaf) {
      if (cells_[cell].bodies.empty() || depth >= kMaxDepth) {
        cells_[cell].bodies.push_back(body);
        return;
      }
      auto moved = std::move(cells_[cell].bodies);
      cells_[cell].bodies.clear();
      cells_[cell].leaf = false;
      for (auto b : moved) insert_child(cell, b, depth);
    }
    insert_child(cell, body, depth);
  }

  void insert_child(std::size_t cell, std::uint32_t body, int depth) {
    const int q = quadrant(cells_[cell], points_[body]);
    if (cells_[cell].child[q] < 0) {
      const double h = cells_[cell].half * 0.5;
      const Vec2 c{cells_[cell].center.x + ((q & 1) ? h : -h), cells_[cell].center.y + ((q & 2) ? h : -h)};
      cells_.emplace_back(c, h);
      cells_[cell].child[q] = static_cast<std::int32_t>(cells_.size() - 1);
    }
    insert(static_cast<std::size_t>(cells_[cell].child[q]), body, depth + 1);
  }

  void summarize(std::size_t cell) {
    double m = 0, x = 0, y = 0;
    if (cells_[cell].leaf) {
      for (auto b : cells_[cell].bodies) {
        m += 1;
        x += points_[b].x;
        y += points_[b].y;
      }
    } else {
      for (auto c : cells_[cell].child) {
        if (c < 0) continue;
        summarize(static_cast<std::size_t>(c));
        const auto& ch = cells_[static_cast<std::size_t>(c)];
        m += ch.mass;
        x += ch.mass * ch.com.x;
        y += ch.mass * ch.com.y;
      }
    }
    cells_[cell].mass = m;
    cells_[cell].com = m > 0 ? Vec2{x / m, y / m} : cells_[cell].center;
  }

  template <class Far, class Near>
  void walk_cell(std::size_t cell, const Vec2& at, double theta, Far& far, Near& near) const {
    const auto& c = cells_[cell];
    if (c.leaf) {
      for (auto b : c.bodies) near(b);
      return;
    }
    const double d = std::hypot(at.x - c.com.x, at.y - c.com.y);
    if (d > 0 && (2.0 * c.half) / d < theta) {
      far(c.mass, c.com);
      return;
    }
    for (auto ch : c.child) {
      if (ch >= 0) walk_cell(static_cast<std::size_t>(ch), at, theta, far, near);
    }
  }

  std::span<const Vec2> points_;
  std::vector<Cell> cells_;
};

}  // namespace

void forces_serial(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                   std::span<Vec2> out) {
  check_shapes(g, positions, out);
  for (std::size_t i = 0; i < positions.size(); ++i) out[i] = exact_force_on(g, positions, model, i);
}

void forces_parallel(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                     std::span<Vec2> out) {
  check_shapes(g, positions, out);
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = exact_force_on(g, positions, model, static_cast<std::size_t>(i));
  }
}

void forces_barnes_hut(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                       double theta, std::span<Vec2> out) {
  check_shapes(g, positions, out);
  const QuadTree tree(positions);
  const double k3 = model.repulsion * model.natural_length * model.natural_length * model.natural_length;
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Vec2 f;
    tree.walk(
        positions[i], theta,
        [&](double mass, const Vec2& com) {
          const double dx = positions[i].x - com.x;
          const double dy = positions[i].y - com.y;
          const double d = std::max(std::hypot(dx, dy), model.min_distance);
          const double mag = mass * k3 / (d * d);
          f.x += mag * dx / d;
          f.y += mag * dy / d;
        },
        [&](std::uint32_t j) {
          if (j == i) return;
          const auto s = separation(model, positions, i, j);
          const double mag = k3 / (s.distance * s.distance);
          f.x += mag * s.unit.x;
          f.y += mag * s.unit.y;
        });
    const Vec2 a = attraction_on(g, positions, model, i);
    out[i] = {f.x + a.x, f.y + a.y};
  }
}

double energy_serial(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model) {
  if (positions.size() != g.node_count()) throw ContractError("energy kernel: position length must equal node count");
  double total = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) total += energy_share(g, positions, model, i);
  return total;
}

double energy_parallel(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model) {
  if (positions.size() != g.node_count()) throw ContractError("energy kernel: position length must equal node count");
  std::vector<double> share(positions.size());
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    share[static_cast<std::size_t>(i)] = energy_share(g, positions, model, static_cast<std::size_t>(i));
  }
  double total = 0;
  for (double s : share) total += s;
  return total;
}

double energy_barnes_hut(const WeightedGraph& g, std::span<const Vec2> positions, const ForceModel& model,
                         double theta) {
  if (positions.size() != g.node_count()) throw ContractError("energy kernel: position length must equal node count");
  const QuadTree tree(positions);
  const double k3 = model.repulsion * model.natural_length * model.natural_length * model.natural_length;
  std::vector<double> share(positions.size());
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double potential = 0;
    tree.walk(
        positions[i], theta,
        [&](double mass, const Vec2& com) {
          potential += mass * k3 / std::max(std::hypot(positions[i].x - com.x, positions[i].y - com.y),
                                             model.min_distance);
        },
        [&](std::uint32_t j) {
          if (j != i) potential += k3 / clamp_distance(model, positions[i], positions[j]);
        });
    double springs = 0;
    const auto nb = g.neighbors(i);
    const auto w = g.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] <= i) continue;
      const double d = clamp_distance(model, positions[i], positions[nb[k]]);
      springs += model.spring * w[k] * d * d * d / (3.0 * model.natural_length);
    }
    share[i] = 0.5 * potential + springs;
  }
  double total = 0;
  for (double s : share) total += s;
  return total;
}

bool openmp_enabled() noexcept {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace atlas::kernels
