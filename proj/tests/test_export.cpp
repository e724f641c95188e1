#include <doctest.h>

#include <set>

#include <json.hpp>

#include "atlas/error.hpp"
#include "atlas/export.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

struct Inputs {
  KeywordGraph graph;
  LayoutResult layout;
  Partition partition;
};

Inputs random_inputs(std::uint64_t seed, std::uint32_t n) {
  std::mt19937_64 rng(seed);
  Inputs in;
  in.graph = test::make_graph(n, test::random_connected_edges(rng, n, 0.2));
  in.layout = spring_layout(in.graph, seed);
  in.partition = louvain(in.graph, seed);
  return in;
}

ExportMeta meta_for(const Partition& p) { return {"2024-03-20T12:00:00Z", p.seed, p.resolution, "lift", p.q}; }

std::set<std::string> keys_of(const nlohmann::json& obj) {
  std::set<std::string> out;
  for (const auto& [k, v] : obj.items()) out.insert(k);
  return out;
}

std::set<std::string> required_of(const nlohmann::json& schema) {
  std::set<std::string> out;
  for (const auto& k : schema.at("required")) out.insert(k.get<std::string>());
  return out;
}

}  // namespace

TEST_SUITE("export") {

TEST_CASE("export round trips") {
  const auto in = random_inputs(3, 20);
  const auto data = make_explorer_export(in.graph, in.layout, in.partition, meta_for(in.partition));
  const auto text = export_explorer_json(data);
  const auto back = parse_explorer_json(text);
  CHECK(back == data);
  CHECK(export_explorer_json(back) == text);
  REQUIRE(back.nodes.size() == in.graph.node_count());
  for (std::size_t i = 0; i < back.nodes.size(); ++i) {
    const auto& node = in.graph.nodes()[i];
    CHECK(back.nodes[i].label == node.label);
    CHECK(back.nodes[i].mentions == node.mentions);
    CHECK(back.nodes[i].score == node.score);
    CHECK(back.nodes[i].community == in.partition.assignment.at(node.id));
    CHECK(back.nodes[i].x == in.layout.positions.at(node.id).x);
  }
  CHECK(back.edges.size() == in.graph.edge_count());
}

TEST_CASE("export is byte deterministic") {
  const auto a = random_inputs(5, 15);
  const auto b = random_inputs(5, 15);
  CHECK(export_explorer_json(make_explorer_export(a.graph, a.layout, a.partition, meta_for(a.partition))) ==
        export_explorer_json(make_explorer_export(b.graph, b.layout, b.partition, meta_for(b.partition))));
}

TEST_CASE("node set mismatch is an export error") {
  const auto in = random_inputs(7, 10);
  auto layout = in.layout;
  layout.positions.erase(layout.positions.begin());
  CHECK_THROWS_AS(make_explorer_export(in.graph, layout, in.partition, {}), ExportError);
  auto partition = in.partition;
  partition.assignment.erase(partition.assignment.begin());
  CHECK_THROWS_AS(make_explorer_export(in.graph, in.layout, partition, {}), ExportError);
  // Same size, different members.
  layout = in.layout;
  const auto first = layout.positions.begin()->second;
  layout.positions.erase(layout.positions.begin());
  layout.positions[static_cast<KeywordId>(999)] = first;
  CHECK_THROWS_AS(make_explorer_export(in.graph, layout, in.partition, {}), ExportError);
}

TEST_CASE("missing fields are named") {
  const auto in = random_inputs(9, 6);
  const auto text = export_explorer_json(make_explorer_export(in.graph, in.layout, in.partition, meta_for(in.partition)));
  const auto doc = nlohmann::json::parse(text);
  auto expect_error = [](const nlohmann::json& broken, const std::string& field) {
    try {
      parse_explorer_json(broken.dump());
      FAIL("expected an export error for " << field);
    } catch (const ExportError& e) {
      CHECK_MESSAGE(std::string(e.what()).find("'" + field + "'") != std::string::npos, e.what());
    }
  };
  for (const char* top : {"meta", "nodes", "edges"}) {
    auto broken = doc;
    broken.erase(top);
    expect_error(broken, top);
  }
  for (const char* key : {"generated_at", "seed", "resolution", "boost_function", "q"}) {
    auto broken = doc;
    broken["meta"].erase(key);
    expect_error(broken, std::string("meta.") + key);
  }
  for (const char* key : {"id", "label", "score", "mentions", "community", "x", "y"}) {
    auto broken = doc;
    broken["nodes"][0].erase(key);
    expect_error(broken, std::string("nodes[].") + key);
  }
  for (const char* key : {"source", "target", "weight", "pair_hits"}) {
    auto broken = doc;
    broken["edges"][0].erase(key);
    expect_error(broken, std::string("edges[].") + key);
  }
  auto mistyped = doc;
  mistyped["nodes"][0]["x"] = "left";
  expect_error(mistyped, "nodes[].x");
  CHECK_THROWS_AS(parse_explorer_json("{not json"), ExportError);
}

TEST_CASE("emitted fields match the published schema") {
  const auto schema = nlohmann::json::parse(test::read_file(ATLAS_SCHEMA_DIR "/explorer.schema.json"));
  const auto in = random_inputs(11, 8);
  const auto doc = nlohmann::json::parse(
      export_explorer_json(make_explorer_export(in.graph, in.layout, in.partition, meta_for(in.partition))));
  CHECK(keys_of(doc) == required_of(schema));
  CHECK(keys_of(doc.at("meta")) == required_of(schema.at("properties").at("meta")));
  CHECK(keys_of(doc.at("nodes").at(0)) == required_of(schema.at("properties").at("nodes").at("items")));
  CHECK(keys_of(doc.at("edges").at(0)) == required_of(schema.at("properties").at("edges").at("items")));
}

}  // TEST_SUITE
