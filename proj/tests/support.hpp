#pragma once

// Helpers shared by the unit tests and the acceptance runner: fixture paths,
// fake transports and clocks, small graph builders, and brute-force oracles.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "atlas/catalog.hpp"
#include "atlas/error.hpp"
#include "atlas/graph.hpp"
#include "atlas/kernels.hpp"
#include "atlas/openalex.hpp"
#include "atlas/relevance.hpp"
#include "atlas/weighted_graph.hpp"

namespace atlas::test {

inline std::filesystem::path fixture_dir() { return ATLAS_FIXTURE_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("atlas_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Time only moves when someone sleeps.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::chrono::system_clock::time_point start = std::chrono::sys_days{std::chrono::year{2024} /
                                                                                            3 / 1})
      : now_(start) {}
  std::chrono::system_clock::time_point now() override { return now_; }
  void sleep_for(std::chrono::nanoseconds d) override {
    if (d > std::chrono::nanoseconds::zero()) {
      now_ += std::chrono::duration_cast<std::chrono::system_clock::duration>(d);
      sleeps.push_back(d);
    }
  }
  void advance(std::chrono::seconds d) { now_ += d; }

  std::vector<std::chrono::nanoseconds> sleeps;

 private:
  std::chrono::system_clock::time_point now_;
};

// Records every request and the clock time it was issued at.
class RecordingTransport : public Transport {
 public:
  using Handler = std::function<HttpResponse(const std::string&)>;
  RecordingTransport(Clock* clock, Handler handler) : clock_(clock), handler_(std::move(handler)) {}

  HttpResponse get(const std::string& target) override {
    targets.push_back(target);
    if (clock_) times.push_back(clock_->now());
    return handler_(target);
  }

  std::vector<std::string> targets;
  std::vector<std::chrono::system_clock::time_point> times;

 private:
  Clock* clock_;
  Handler handler_;
};

inline HttpResponse works_body(std::int64_t count) {
  return {200, R"({"meta":{"count":)" + std::to_string(count) + R"(,"page":1},"results":[]})"};
}

// Answers every query with a count derived from the target's length.
inline RecordingTransport counting_transport(Clock* clock = nullptr) {
  return RecordingTransport(clock, [](const std::string& t) { return works_body(static_cast<std::int64_t>(t.size())); });
}

// Fails the test run if anything reaches the network.
class ForbiddenTransport final : public Transport {
 public:
  HttpResponse get(const std::string& target) override {
    ++calls;
    throw TransportError("network request attempted: " + target);
  }
  int calls = 0;
};

inline KeywordSet make_keywords(const std::vector<std::string>& labels, const std::vector<int>& mentions = {}) {
  std::vector<Keyword> kws;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Keyword k;
    k.canonical = labels[i];
    k.mention_count = i < mentions.size() ? mentions[i] : 0;
    kws.push_back(std::move(k));
  }
  return KeywordSet(std::move(kws));
}

// Labels "n00", "n01", ... so ids follow node index.
inline std::string node_label(std::size_t i) {
  std::string s = std::to_string(i);
  return "n" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

// KeywordGraph over nodes 0..n-1 with unit scores.
inline KeywordGraph make_graph(std::size_t n, const std::vector<WeightedEdge>& edges) {
  std::vector<GraphNode> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({static_cast<KeywordId>(i), node_label(i), 1.0 + i, 1});
  std::vector<GraphEdge> ge;
  for (const auto& e : edges) ge.push_back({static_cast<KeywordId>(e.u), static_cast<KeywordId>(e.v), 1, e.weight});
  return KeywordGraph(std::move(nodes), std::move(ge));
}

inline std::vector<WeightedEdge> clique(std::uint32_t first, std::uint32_t size, double w = 1.0) {
  std::vector<WeightedEdge> out;
  for (std::uint32_t i = first; i < first + size; ++i)
    for (std::uint32_t j = i + 1; j < first + size; ++j) out.push_back({i, j, w});
  return out;
}

// Two unit 4-cliques {0..3}, {4..7} joined by the bridge 3-4.
inline std::vector<WeightedEdge> bridged_cliques() {
  auto edges = clique(0, 4);
  auto second = clique(4, 4);
  edges.insert(edges.end(), second.begin(), second.end());
  edges.push_back({3, 4, 1.0});
  return edges;
}

// Random connected graph: a random spanning tree plus extra edges, weights in [0.1, 10).
inline std::vector<WeightedEdge> random_connected_edges(std::mt19937_64& rng, std::uint32_t n, double extra_p) {
  std::uniform_real_distribution<double> weight(0.1, 10.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> edges;
  for (std::uint32_t i = 1; i < n; ++i) {
    const auto parent = order[std::uniform_int_distribution<std::uint32_t>(0, i - 1)(rng)];
    edges[std::minmax(parent, order[i])] = weight(rng);
  }
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (!edges.contains({i, j}) && coin(rng) < extra_p) edges[{i, j}] = weight(rng);
  std::vector<WeightedEdge> out;
  for (const auto& [k, w] : edges) out.push_back({k.first, k.second, w});
  return out;
}

// Modularity straight from the definition over the edge list, independent of
// the adjacency layout the kernels use.
inline double modularity_oracle(std::size_t n, const std::vector<WeightedEdge>& edges,
                                const std::vector<std::uint32_t>& membership, double resolution = 1.0) {
  double m = 0;
  std::vector<double> degree(n, 0.0);
  for (const auto& e : edges) {
    m += e.weight;
    degree[e.u] += e.weight;
    degree[e.v] += e.weight;
  }
  if (m == 0) return 0;
  double q = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (membership[i] != membership[j]) continue;
      double a = 0;
      for (const auto& e : edges)
        if ((e.u == i && e.v == j) || (e.u == j && e.v == i)) a += e.weight;
      q += a - resolution * degree[i] * degree[j] / (2 * m);
    }
  }
  return q / (2 * m);
}

// Calls `visit` with every set partition of {0..n-1} as a restricted growth string.
inline void for_each_set_partition(std::size_t n, const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
  std::vector<std::uint32_t> a(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t i, std::uint32_t max_label) {
    if (i == n) {
      visit(a);
      return;
    }
    for (std::uint32_t c = 0; c <= max_label + 1; ++c) {
      a[i] = c;
      rec(i + 1, std::max(max_label, c));
    }
  };
  if (n == 0) return visit(a);
  rec(1, 0);
}

struct OptimalPartition {
  double q = -1;
  std::vector<std::uint32_t> membership;
  std::size_t partitions_seen = 0;
};

inline OptimalPartition brute_force_optimum(std::size_t n, const std::vector<WeightedEdge>& edges,
                                            double resolution = 1.0) {
  OptimalPartition best;
  for_each_set_partition(n, [&](const std::vector<std::uint32_t>& m) {
    ++best.partitions_seen;
    const double q = modularity_oracle(n, edges, m, resolution);
    if (q > best.q) {
      best.q = q;
      best.membership = m;
    }
  });
  return best;
}

// Same grouping, ignoring community labels.
inline bool same_grouping(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::uint32_t, std::uint32_t> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

// Net force on node 0 when two unit-weight nodes sit d apart, from the stated
// force laws (positive = attraction wins).
inline double two_node_net_attraction(double d, const kernels::ForceModel& m) {
  const double attract = m.spring * 1.0 * d * d / m.natural_length;
  const double repel = m.repulsion * std::pow(m.natural_length, 3) / (d * d);
  return attract - repel;
}

// Root of the two-node balance by bisection.
inline double two_node_equilibrium(const kernels::ForceModel& m) {
  double lo = 1e-6, hi = 1.0;
  while (two_node_net_attraction(hi, m) < 0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (two_node_net_attraction(mid, m) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Fixed-width counts fixture for the relevance properties.
struct CountsFixture {
  KeywordSet keywords;
  std::vector<HitCounts> counts;
};

inline CountsFixture random_counts_fixture(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::int64_t> hk(0, 200000);
  std::uniform_int_distribution<int> tie_pool(0, 9);
  CountsFixture f;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("kw" + std::to_string(1000 + i));
  f.keywords = make_keywords(labels);
  const std::int64_t total = 250'000'000;
  const std::int64_t context = std::uniform_int_distribution<std::int64_t>(1, 1'000'000)(rng);
  // A small pool of shared h_kc values forces ties across keywords with different h_k.
  std::vector<std::int64_t> pool;
  for (int i = 0; i < 10; ++i) pool.push_back(std::uniform_int_distribution<std::int64_t>(0, 5000)(rng));
  for (std::size_t i = 0; i < n; ++i) {
    HitCounts c;
    c.keyword = hk(rng);
    c.context = context;
    c.total = total;
    const auto shared = pool[tie_pool(rng)];
    c.keyword_in_context = c.keyword == 0 ? 0 : std::min(c.keyword, shared);
    f.counts.push_back(c);
  }
  return f;
}

// Keyword ids ordered by h_kc descending, ties by label (ids follow labels).
inline std::vector<KeywordId> rank_by_context_hits(const CountsFixture& f) {
  std::vector<KeywordId> ids;
  for (const auto& kw : f.keywords.all()) ids.push_back(kw.id);
  std::stable_sort(ids.begin(), ids.end(), [&](KeywordId a, KeywordId b) {
    return f.counts[to_index(a)].keyword_in_context > f.counts[to_index(b)].keyword_in_context;
  });
  return ids;
}

}  // namespace atlas::test
