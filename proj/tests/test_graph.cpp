#include <doctest.h>

#include <random>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/graph.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

KeywordId kid(std::uint32_t i) { return static_cast<KeywordId>(i); }

void put_pair(HitStore& store, const KeywordSet& kws, std::uint32_t a, std::uint32_t b, std::int64_t hits) {
  store.put({pair_query(kws, {kid(a), kid(b)}).render(), hits, {}, HitSource::cache});
}

std::vector<AssociationCandidate> load(const std::string& text, const KeywordSet& kws, const AliasTable& aliases = {}) {
  std::istringstream in("keyword_a,keyword_b,accepted,note\n" + text);
  return load_associations(in, kws, aliases);
}

// Random keyword universe with scores, pair hits and an allowlist.
struct RandomBuild {
  KeywordSet keywords;
  std::map<KeywordId, double> scores;
  HitStore store;
  std::vector<AssociationCandidate> allowlist;
};

RandomBuild random_build(std::mt19937_64& rng, std::uint32_t n) {
  RandomBuild r;
  std::vector<std::string> labels;
  for (std::uint32_t i = 0; i < n; ++i) labels.push_back(test::node_label(i));
  r.keywords = test::make_keywords(labels);
  std::uniform_real_distribution<double> score(0.5, 1e6);
  std::uniform_int_distribution<std::int64_t> hits(0, 5000);
  std::bernoulli_distribution coin(0.35), accept(0.85);
  for (std::uint32_t i = 0; i < n; ++i) r.scores[kid(i)] = score(rng);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (!coin(rng)) continue;
      r.allowlist.push_back({kid(i), kid(j), accept(rng), ""});
      put_pair(r.store, r.keywords, i, j, hits(rng) < 300 ? 0 : hits(rng));
    }
  }
  return r;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("load_associations") {
  const auto kws = test::make_keywords({"a", "b", "c"});
  SUBCASE("pairs are canonicalized") {
    const auto list = load("c,a,true,\nb,c,false,common words\n", kws);
    REQUIRE(list.size() == 2);
    CHECK(list[0].keyword_a == kid(0));
    CHECK(list[0].keyword_b == kid(2));
    CHECK(list[0].accepted);
    CHECK_FALSE(list[1].accepted);
    CHECK(list[1].note == "common words");
  }
  SUBCASE("empty file") { CHECK(load("", kws).empty()); }
  SUBCASE("reversed duplicate names both lines") {
    try {
      load("a,b,true,\nb,a,true,\n", kws);
      FAIL("expected an association error");
    } catch (const AssociationError& e) {
      const std::string what = e.what();
      CHECK(what.find("lines 2 and 3") != std::string::npos);
    }
  }
  SUBCASE("unknown keyword") { CHECK_THROWS_AS(load("a,qux,true,\n", kws), AssociationError); }
  SUBCASE("self pair") { CHECK_THROWS_AS(load("a,A,true,\n", kws), AssociationError); }
  SUBCASE("bad flag") { CHECK_THROWS_AS(load("a,b,yes,\n", kws), ParseError); }
  SUBCASE("aliases resolve") {
    const AliasTable aliases{{"alpha", "a"}};
    CHECK(load("Alpha,b,true,\n", kws, aliases).at(0).keyword_a == kid(0));
  }
}

TEST_CASE("edge weight is pair hits times both scores") {
  const auto kws = test::make_keywords({"i", "j"});
  HitStore store;
  put_pair(store, kws, 0, 1, 10);
  const std::vector<AssociationCandidate> allow{{kid(0), kid(1), true, ""}};
  const auto r = build_graph(kws, {{kid(0), 2.0}, {kid(1), 3.0}}, store, allow);
  REQUIRE(r.graph.edge_count() == 1);
  CHECK(r.graph.edges()[0].weight == 60.0);
  CHECK(r.graph.edges()[0].pair_hits == 10);
}

TEST_CASE("zero weight and rejected pairs are dropped") {
  const auto kws = test::make_keywords({"a", "b", "c", "d"});
  HitStore store;
  put_pair(store, kws, 0, 1, 0);
  put_pair(store, kws, 1, 2, 500);
  put_pair(store, kws, 2, 3, 7);
  const std::vector<AssociationCandidate> allow{
      {kid(0), kid(1), true, ""}, {kid(1), kid(2), false, "superficial"}, {kid(2), kid(3), true, ""}};
  const std::map<KeywordId, double> scores{{kid(0), 1.0}, {kid(1), 1.0}, {kid(2), 1.0}, {kid(3), 1.0}};
  const auto r = build_graph(kws, scores, store, allow);
  REQUIRE(r.graph.edge_count() == 1);
  CHECK(r.graph.edges()[0].a == kid(2));
  CHECK(r.graph.node_count() == 2);
  CHECK(r.isolated == std::vector{kid(0), kid(1)});
}

TEST_CASE("zero score drops the edge") {
  const auto kws = test::make_keywords({"a", "b"});
  HitStore store;
  put_pair(store, kws, 0, 1, 9);
  const std::vector<AssociationCandidate> allow{{kid(0), kid(1), true, ""}};
  CHECK(build_graph(kws, {{kid(0), 0.0}, {kid(1), 4.0}}, store, allow).graph.empty());
}

TEST_CASE("missing pair count names the pair") {
  const auto kws = test::make_keywords({"chaos", "emergence"});
  const std::vector<AssociationCandidate> allow{{kid(0), kid(1), true, ""}};
  try {
    build_graph(kws, {{kid(0), 1.0}, {kid(1), 1.0}}, HitStore{}, allow);
    FAIL("expected a build error");
  } catch (const BuildError& e) {
    CHECK(std::string(e.what()).find("'chaos' / 'emergence'") != std::string::npos);
  }
}

TEST_CASE("pair exceeding a member's hits is reported") {
  const auto kws = test::make_keywords({"a", "b"});
  HitStore store;
  put_pair(store, kws, 0, 1, 50);
  store.put({QueryExpression::single("a").render(), 40, {}, HitSource::cache});
  store.put({QueryExpression::single("b").render(), 400, {}, HitSource::cache});
  const std::vector<AssociationCandidate> allow{{kid(0), kid(1), true, ""}};
  CHECK(build_graph(kws, {{kid(0), 1.0}, {kid(1), 1.0}}, store, allow).warnings.size() == 1);
}

TEST_CASE("build properties over random inputs") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    auto r = random_build(rng, 12 + trial % 10);
    const auto base = build_graph(r.keywords, r.scores, r.store, r.allowlist);

    std::size_t accepted = 0;
    for (const auto& c : r.allowlist) accepted += c.accepted;
    CHECK(base.graph.edge_count() <= accepted);
    for (const auto& e : base.graph.edges()) {
      const auto match = std::count_if(r.allowlist.begin(), r.allowlist.end(), [&](const AssociationCandidate& c) {
        return c.accepted && c.keyword_a == e.a && c.keyword_b == e.b;
      });
      CHECK(match == 1);
      CHECK(e.weight > 0);
    }
    CHECK(base.graph.node_count() + base.isolated.size() == r.keywords.size());

    auto shuffled = r.allowlist;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = build_graph(r.keywords, r.scores, r.store, shuffled);
    REQUIRE(again.graph.edge_count() == base.graph.edge_count());
    for (std::size_t i = 0; i < base.graph.edge_count(); ++i) {
      CHECK(again.graph.edges()[i].a == base.graph.edges()[i].a);
      CHECK(again.graph.edges()[i].b == base.graph.edges()[i].b);
      CHECK(again.graph.edges()[i].weight == base.graph.edges()[i].weight);
    }
  }
}

TEST_CASE("scaling scores by c scales weights by c squared") {
  std::mt19937_64 rng(37);
  for (double c : {4.0, 0.25, 3.0, 17.3}) {
    auto r = random_build(rng, 20);
    const auto base = build_graph(r.keywords, r.scores, r.store, r.allowlist);
    for (auto& [id, s] : r.scores) s *= c;
    const auto scaled = build_graph(r.keywords, r.scores, r.store, r.allowlist);
    REQUIRE(scaled.graph.edge_count() == base.graph.edge_count());
    std::vector<std::size_t> order_base(base.graph.edge_count()), order_scaled(base.graph.edge_count());
    for (std::size_t i = 0; i < order_base.size(); ++i) order_base[i] = order_scaled[i] = i;
    auto by_weight = [](const KeywordGraph& g) {
      return [&g](std::size_t x, std::size_t y) { return g.edges()[x].weight < g.edges()[y].weight; };
    };
    std::stable_sort(order_base.begin(), order_base.end(), by_weight(base.graph));
    std::stable_sort(order_scaled.begin(), order_scaled.end(), by_weight(scaled.graph));
    CHECK(order_base == order_scaled);
    for (std::size_t i = 0; i < base.graph.edge_count(); ++i) {
      const double expected = base.graph.edges()[i].weight * c * c;
      const double got = scaled.graph.edges()[i].weight;
      // Powers of two scale without rounding.
      if (c == 4.0 || c == 0.25) CHECK(got == expected);
      else CHECK(std::abs(got - expected) <= 1e-12 * expected);
    }
  }
}

TEST_CASE("graph csv round trip") {
  std::mt19937_64 rng(41);
  auto r = random_build(rng, 15);
  const auto g = build_graph(r.keywords, r.scores, r.store, r.allowlist).graph;
  std::stringstream nodes, edges;
  write_nodes_csv(nodes, g);
  write_edges_csv(edges, g);
  const auto back = read_graph_csv(nodes, edges);
  REQUIRE(back.node_count() == g.node_count());
  REQUIRE(back.edge_count() == g.edge_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    CHECK(back.nodes()[i].id == g.nodes()[i].id);
    CHECK(back.nodes()[i].label == g.nodes()[i].label);
    CHECK(back.nodes()[i].score == g.nodes()[i].score);
  }
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    CHECK(back.edges()[i].weight == g.edges()[i].weight);
    CHECK(back.edges()[i].pair_hits == g.edges()[i].pair_hits);
  }
}

TEST_CASE("keyword graph contract") {
  std::vector<GraphNode> nodes{{kid(0), "a", 1, 0}, {kid(1), "b", 1, 0}};
  CHECK_THROWS_AS(KeywordGraph(nodes, {{kid(0), kid(0), 1, 1.0}}), ContractError);
  CHECK_THROWS_AS(KeywordGraph(nodes, {{kid(0), kid(1), 1, 0.0}}), ContractError);
  CHECK_THROWS_AS(KeywordGraph(nodes, {{kid(0), kid(1), 1, 1.0}, {kid(1), kid(0), 1, 2.0}}), ContractError);
  CHECK_THROWS_AS(KeywordGraph(nodes, {{kid(0), kid(5), 1, 1.0}}), ContractError);
}

}  // TEST_SUITE

TEST_SUITE("weighted_graph") {

TEST_CASE("degrees, loops and parallel edges") {
  const std::vector<WeightedEdge> edges{{0, 1, 2.0}, {1, 0, 3.0}, {1, 1, 4.0}, {1, 2, 1.0}};
  WeightedGraph g(3, edges);
  CHECK(g.edge_count() == 3);
  CHECK(g.degree(0) == 5.0);
  CHECK(g.degree(1) == 5.0 + 8.0 + 1.0);
  CHECK(g.total_weight() == 10.0);
  CHECK(g.max_weight() == 5.0);
  CHECK_THROWS_AS(WeightedGraph(2, std::vector<WeightedEdge>{{0, 2, 1.0}}), ContractError);
}

}  // TEST_SUITE
