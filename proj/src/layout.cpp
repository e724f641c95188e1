#include "atlas/layout.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <random>

#include <json.hpp>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"

namespace atlas {

namespace {

using kernels::ForceModel;

constexpr std::size_t kMemory = 20;  // quasi-Newton history length

struct Evaluator {
  const WeightedGraph& g;
  ForceModel model;
  const LayoutParams& params;

  void forces(std::span<const Vec2> x, std::span<Vec2> out) const {
    switch (params.kernel) {
      case ForceKernel::serial:
        kernels::forces_serial(g, x, model, out);
        break;
      case ForceKernel::parallel:
        kernels::forces_parallel(g, x, model, out);
        break;
      case ForceKernel::barnes_hut:
        kernels::forces_barnes_hut(g, x, model, params.theta, out);
        break;
    }
  }

  double energy(std::span<const Vec2> x) const {
    switch (params.kernel) {
      case ForceKernel::serial:
        return kernels::energy_serial(g, x, model);
      case ForceKernel::parallel:
        return kernels::energy_parallel(g, x, model);
      case ForceKernel::barnes_hut:
        return kernels::energy_barnes_hut(g, x, model, params.theta);
    }
    return 0;
  }
};

double max_norm(std::span<const Vec2> f) {
  double r = 0;
  for (const auto& v : f) r = std::max(r, std::hypot(v.x, v.y));
  return r;
}

void check_params(const LayoutParams& p) {
  if (!(p.spring > 0) || !(p.natural_length > 0) || !(p.repulsion > 0)) {
    throw ConfigError("layout spring, natural_length and repulsion must be positive");
  }
  if (!(p.initial_step > 0) || !(p.step_growth >= 1) || !(p.max_step > 0)) throw ConfigError("bad layout step schedule");
  if (!(p.cooling > 0 && p.cooling <= 1)) throw ConfigError("layout cooling must be in (0, 1]");
  if (p.max_iterations < 0 || !(p.tolerance >= 0)) throw ConfigError("bad layout iteration limits");
}

}  // namespace

std::string_view to_string(ForceKernel kernel) noexcept {
  switch (kernel) {
    case ForceKernel::serial:
      return "serial";
    case ForceKernel::parallel:
      return "parallel";
    case ForceKernel::barnes_hut:
      return "barnes_hut";
  }
  return "serial";
}

ForceKernel parse_force_kernel(std::string_view name) {
  if (name == "serial") return ForceKernel::serial;
  if (name == "parallel") return ForceKernel::parallel;
  if (name == "barnes_hut") return ForceKernel::barnes_hut;
  throw ConfigError("unknown force kernel '" + std::string(name) + "' (serial, parallel, barnes_hut)");
}

std::vector<Vec2> spring_positions(const WeightedGraph& g, std::uint64_t seed, const LayoutParams& params,
                                   int* iterations_out, double* residual_out, LayoutTrace* trace) {
  check_params(params);
  const std::size_t n = g.node_count();
  if (n == 0) throw ContractError("layout needs at least one node");
  std::vector<Vec2> x(n);
  int iterations = 0;
  double residual = 0;
  if (n > 1) {
    const ForceModel model{params.spring, params.natural_length, params.repulsion, 1e-6 * params.natural_length,
                           seed};
    const Evaluator eval{g, model, params};
    std::mt19937_64 rng(seed);
    const double side = params.natural_length * std::sqrt(static_cast<double>(n));
    auto coord = [&] { return (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * side; };
    for (auto& p : x) {
      p.x = coord();
      p.y = coord();
    }

    std::vector<Vec2> f(n), trial(n), dir(n), f_new(n);
    eval.forces(x, f);
    double energy = eval.energy(x);
    residual = max_norm(f);
    if (trace) trace->energies.push_back(energy);
    double step = params.initial_step;
    double temperature = side;
    const double min_temperature = params.min_temperature * params.natural_length;

    // Limited-memory quasi-Newton on the energy, whose negative gradient is
    // the force field. Position and force differences of recent accepted moves.
    struct Pair {
      std::vector<Vec2> s, y;
      double rho;
    };
    std::deque<Pair> memory;
    auto dot = [](std::span<const Vec2> a, std::span<const Vec2> b) {
      double r = 0;
      for (std::size_t i = 0; i < a.size(); ++i) r += a[i].x * b[i].x + a[i].y * b[i].y;
      return r;
    };
    std::vector<double> alpha;
    auto direction = [&] {
      // Two-loop recursion run on -g = f, so dir = -H g directly. Each s is a
      // position change and y the matching gradient change (f_old - f_new).
      dir.assign(f.begin(), f.end());
      alpha.assign(memory.size(), 0.0);
      for (std::size_t k = memory.size(); k-- > 0;) {
        const auto& m = memory[k];
        alpha[k] = m.rho * dot(m.s, dir);
        for (std::size_t i = 0; i < n; ++i) {
          dir[i].x -= alpha[k] * m.y[i].x;
          dir[i].y -= alpha[k] * m.y[i].y;
        }
      }
      double gamma = 0;
      if (!memory.empty()) {
        const auto& m = memory.back();
        gamma = 1.0 / (m.rho * dot(m.y, m.y));
      } else {
        const double fmax = std::max(max_norm(f), 1e-300);
        gamma = 0.1 * params.natural_length / fmax;
      }
      for (auto& d : dir) {
        d.x *= gamma;
        d.y *= gamma;
      }
      for (std::size_t k = 0; k < memory.size(); ++k) {
        const auto& m = memory[k];
        const double beta = m.rho * dot(m.y, dir);
        for (std::size_t i = 0; i < n; ++i) {
          dir[i].x += (alpha[k] - beta) * m.s[i].x;
          dir[i].y += (alpha[k] - beta) * m.s[i].y;
        }
      }
      if (dot(dir, f) <= 0) {  // not a descent direction: fall back to the force itself
        memory.clear();
        const double fmax = std::max(max_norm(f), 1e-300);
        for (std::size_t i = 0; i < n; ++i) dir[i] = {0.1 * params.natural_length * f[i].x / fmax,
                                                      0.1 * params.natural_length * f[i].y / fmax};
      }
    };

    direction();
    while (residual > params.tolerance && iterations < params.max_iterations) {
      ++iterations;
      for (std::size_t i = 0; i < n; ++i) {
        double dx = step * dir[i].x;
        double dy = step * dir[i].y;
        const double len = std::hypot(dx, dy);
        if (len > temperature) {
          dx *= temperature / len;
          dy *= temperature / len;
        }
        trial[i] = {x[i].x + dx, x[i].y + dy};
      }
      const double trial_energy = eval.energy(trial);
      if (trial_energy <= energy) {
        eval.forces(trial, f_new);
        Pair m{std::vector<Vec2>(n), std::vector<Vec2>(n), 0};
        for (std::size_t i = 0; i < n; ++i) {
          m.s[i] = {trial[i].x - x[i].x, trial[i].y - x[i].y};
          m.y[i] = {f[i].x - f_new[i].x, f[i].y - f_new[i].y};
        }
        const double sy = dot(m.s, m.y);
        if (sy > 1e-12 * std::sqrt(dot(m.s, m.s) * dot(m.y, m.y))) {
          m.rho = 1.0 / sy;
          memory.push_back(std::move(m));
          if (memory.size() > kMemory) memory.pop_front();
        }
        std::swap(x, trial);
        std::swap(f, f_new);
        energy = trial_energy;
        residual = max_norm(f);
        step = std::min(step * params.step_growth, params.max_step);
        if (trace) trace->energies.push_back(energy);
        direction();
      } else {
        step *= 0.5;
        if (trace) ++trace->rejected;
        if (step < 1e-10) {  // stale curvature model: restart from the plain force direction
          memory.clear();
          step = params.initial_step;
          direction();
        }
      }
      temperature = std::max(temperature * params.cooling, min_temperature);
    }

    double cx = 0, cy = 0;
    for (const auto& p : x) {
      cx += p.x;
      cy += p.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (auto& p : x) {
      p.x -= cx;
      p.y -= cy;
    }
    eval.forces(x, f);
    residual = max_norm(f);
  }
  if (iterations_out) *iterations_out = iterations;
  if (residual_out) *residual_out = residual;
  return x;
}

Bounds bounds_of(const std::map<KeywordId, Vec2>& positions) {
  Bounds b;
  bool first = true;
  for (const auto& [id, p] : positions) {
    if (first) {
      b = {p.x, p.y, p.x, p.y};
      first = false;
      continue;
    }
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

LayoutResult spring_layout(const KeywordGraph& graph, std::uint64_t seed, const LayoutParams& params,
                           LayoutTrace* trace) {
  if (graph.empty()) throw ContractError("layout needs at least one node");
  // Rescale weights to (0, 1] so force constants do not depend on the weight scale.
  const auto& raw = graph.weighted();
  auto edges = raw.edges();
  const double top = raw.max_weight();
  for (auto& e : edges) e.weight = top > 0 ? e.weight / top : e.weight;
  const WeightedGraph normalized(raw.node_count(), edges);

  LayoutResult result;
  result.seed = seed;
  const auto x = spring_positions(normalized, seed, params, &result.iterations, &result.residual, trace);
  for (std::size_t i = 0; i < x.size(); ++i) result.positions[graph.nodes()[i].id] = x[i];
  result.converged = result.residual <= params.tolerance;
  result.bounds = bounds_of(result.positions);
  return result;
}

LayoutResult grouped_layout(const KeywordGraph& graph, const Partition& partition, std::uint64_t seed,
                            const LayoutParams& params) {
  const auto membership = membership_of(graph, partition);
  const std::uint32_t k = membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < membership.size(); ++i) members[membership[i]].push_back(i);

  std::vector<LayoutResult> parts;
  parts.reserve(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    if (members[c].empty()) throw ContractError("community ids must be dense");
    parts.push_back(spring_layout(graph.induced(members[c]), seed + c, params));
  }

  LayoutResult result;
  result.seed = seed;
  result.converged = true;
  if (k == 0) return result;
  if (k == 1) return parts.front();

  double cell_w = 0, cell_h = 0;
  for (const auto& p : parts) {
    cell_w = std::max(cell_w, p.bounds.width());
    cell_h = std::max(cell_h, p.bounds.height());
  }
  const double margin = 2.0 * params.natural_length;
  cell_w += margin;
  cell_h += margin;
  const auto cols = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(k))));
  const double origin_x = parts[0].bounds.min_x;
  const double origin_y = parts[0].bounds.min_y;
  for (std::uint32_t c = 0; c < k; ++c) {
    const auto& part = parts[c];
    const double dx = origin_x + (c % cols) * cell_w - part.bounds.min_x;
    const double dy = origin_y + (c / cols) * cell_h - part.bounds.min_y;
    for (const auto& [id, p] : part.positions) result.positions[id] = {p.x + dx, p.y + dy};
    result.iterations = std::max(result.iterations, part.iterations);
    result.residual = std::max(result.residual, part.residual);
    result.converged = result.converged && part.converged;
  }
  result.bounds = bounds_of(result.positions);
  return result;
}

std::vector<Bounds> community_bounds(const KeywordGraph& graph, const Partition& partition,
                                     const LayoutResult& layout) {
  std::vector<std::map<KeywordId, Vec2>> groups(partition.community_count);
  for (const auto& node : graph.nodes()) {
    groups.at(partition.assignment.at(node.id))[node.id] = layout.positions.at(node.id);
  }
  std::vector<Bounds> out;
  for (const auto& g : groups) out.push_back(bounds_of(g));
  return out;
}

void write_layout_csv(std::ostream& out, const KeywordGraph& graph, const LayoutResult& layout) {
  out << "keyword,x,y\n";
  for (const auto& node : graph.nodes()) {
    const auto& p = layout.positions.at(node.id);
    out << csv::quote(node.label) << ',' << csv::format_double(p.x) << ',' << csv::format_double(p.y) << '\n';
  }
}

std::string layout_metadata_json(const LayoutResult& layout) {
  nlohmann::ordered_json doc;
  doc["seed"] = layout.seed;
  doc["iterations"] = layout.iterations;
  doc["residual"] = layout.residual;
  doc["converged"] = layout.converged;
  doc["bounds"] = {layout.bounds.min_x, layout.bounds.min_y, layout.bounds.max_x, layout.bounds.max_y};
  return doc.dump(2) + "\n";
}

LayoutResult read_layout(std::istream& csv_in, std::string_view metadata_json, const KeywordGraph& graph) {
  LayoutResult layout;
  const auto meta = nlohmann::json::parse(metadata_json, nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) throw ConfigError("layout metadata is not a JSON object");
  try {
    layout.seed = meta.at("seed").get<std::uint64_t>();
    layout.iterations = meta.at("iterations").get<int>();
    layout.residual = meta.at("residual").get<double>();
    layout.converged = meta.at("converged").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("layout metadata: ") + e.what());
  }
  std::map<std::string, KeywordId, std::less<>> by_label;
  for (const auto& n : graph.nodes()) by_label[n.label] = n.id;
  csv::Reader reader(csv_in, "keyword,x,y");
  while (auto row = reader.next()) {
    auto it = by_label.find(row->fields[0]);
    if (it == by_label.end()) throw ParseError(row->line, "keyword '" + row->fields[0] + "' is not a graph node");
    layout.positions[it->second] = {csv::parse_double(row->fields[1], row->line),
                                    csv::parse_double(row->fields[2], row->line)};
  }
  if (layout.positions.size() != graph.node_count()) throw ConfigError("layout does not cover every graph node");
  layout.bounds = bounds_of(layout.positions);
  return layout;
}

}  // namespace atlas
