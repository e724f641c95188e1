#include <doctest.h>

#include <random>
#include <regex>

#include "atlas/error.hpp"
#include "atlas/render.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

struct Scene {
  KeywordGraph graph;
  LayoutResult layout;
  Partition partition;
};

Scene random_scene(std::uint64_t seed, std::uint32_t n) {
  std::mt19937_64 rng(seed);
  Scene s;
  s.graph = test::make_graph(n, test::random_connected_edges(rng, n, 0.2));
  s.layout = spring_layout(s.graph, seed);
  s.partition = louvain(s.graph, seed);
  return s;
}

std::map<std::string, double> random_weights(std::mt19937_64& rng, std::size_t n) {
  static const char* kParts[] = {"chaos", "network", "emergence", "self", "organized", "learning", "theory",
                                 "systems", "agent", "dynamics", "complex", "science", "fractal"};
  std::uniform_int_distribution<std::size_t> part(0, std::size(kParts) - 1);
  std::uniform_real_distribution<double> expo(0, 5);
  std::map<std::string, double> out;
  while (out.size() < n) {
    std::string label = kParts[part(rng)];
    if (rng() % 2) label += std::string(" ") + kParts[part(rng)];
    label += " " + std::to_string(out.size());
    out[label] = std::pow(10.0, expo(rng));
  }
  return out;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("single node network") {
  const auto g = test::make_graph(1, {});
  const auto svg = render_network_svg(g, spring_layout(g, 1), louvain(g, 1));
  CHECK(count_of(svg, "<circle") == 1);
  CHECK(count_of(svg, "<line") == 0);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg xmlns") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("one circle, line and label per node and edge") {
  const auto s = random_scene(3, 25);
  const auto svg = render_network_svg(s.graph, s.layout, s.partition);
  CHECK(count_of(svg, "<circle") == s.graph.node_count());
  CHECK(count_of(svg, "<line") == s.graph.edge_count());
  CHECK(count_of(svg, "<text") == s.graph.node_count());
  CHECK(render_network_svg(s.graph, s.layout, s.partition) == svg);
}

TEST_CASE("community colours follow the palette") {
  const auto palette = default_palette();
  REQUIRE(palette.size() >= 4);
  CHECK(palette[0] == "#f28e2b");
  CHECK(palette[1] == "#edc948");
  CHECK(palette[2] == "#b07aa1");
  CHECK(palette[3] == "#59a14f");
  StyleSpec style;
  CHECK(community_color(0, style) == palette[0]);
  style.palette = {"#000001", "#000002"};
  CHECK(community_color(5, style) == "#000002");

  const auto s = random_scene(5, 30);
  const auto svg = render_network_svg(s.graph, s.layout, s.partition);
  const std::regex circle(R"re(fill="(#[0-9a-f]{6})" data-community="(\d+)")re");
  std::size_t seen = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), circle); it != std::sregex_iterator(); ++it) {
    const auto c = static_cast<std::uint32_t>(std::stoul((*it)[2]));
    CHECK((*it)[1] == palette[c % palette.size()]);
    ++seen;
  }
  CHECK(seen == s.graph.node_count());
}

TEST_CASE("node size and edge stroke are monotone") {
  const StyleSpec style;
  double prev_r = 0, prev_s = 0;
  for (int i = 1; i <= 200; ++i) {
    const double r = node_radius(i, 200, style);
    const double s = edge_stroke(i, 200, style);
    CHECK(r > prev_r);
    CHECK(s >= prev_s);
    prev_r = r;
    prev_s = s;
  }
  CHECK(node_radius(200, 200, style) == style.max_radius);
}

TEST_CASE("annotations are drawn when configured") {
  const auto s = random_scene(7, 10);
  StyleSpec style;
  style.annotations.push_back({10, 10, 200, 300, "growth & <decay>"});
  const auto svg = render_network_svg(s.graph, s.layout, s.partition, style);
  CHECK(count_of(svg, "marker-end") == 1);
  CHECK(svg.find("growth &amp; &lt;decay&gt;") != std::string::npos);
  CHECK(render_network_svg(s.graph, s.layout, s.partition).find("marker-end") == std::string::npos);
}

TEST_CASE("xml escaping") { CHECK(xml_escape(R"(a<b>&"c')") == "a&lt;b&gt;&amp;&quot;c&apos;"); }

TEST_CASE("render needs a covering layout") {
  const auto s = random_scene(9, 6);
  LayoutResult partial = s.layout;
  partial.positions.erase(partial.positions.begin());
  CHECK_THROWS_AS(render_network_svg(s.graph, partial, s.partition), ContractError);
}

}  // TEST_SUITE

TEST_SUITE("wordcloud") {

TEST_CASE("single word is centred") {
  const WordCloudOptions opt;
  const auto cloud = layout_wordcloud({{"complexity", 3.0}}, opt);
  REQUIRE(cloud.words.size() == 1);
  const auto& w = cloud.words[0];
  CHECK(std::abs(w.x + w.w / 2 - opt.width / 2) <= 1e-9);
  CHECK(std::abs(w.y + w.h / 2 - opt.height / 2) <= 1e-9);
  CHECK(w.font_size == opt.max_font);
}

TEST_CASE("equal weights give equal fonts and disjoint boxes") {
  const auto cloud = layout_wordcloud({{"alpha", 2.0}, {"omega", 2.0}});
  REQUIRE(cloud.words.size() == 2);
  CHECK(cloud.words[0].font_size == cloud.words[1].font_size);
  CHECK_FALSE(cloud.words[0].intersects(cloud.words[1]));
}

TEST_CASE("font size follows the square root of weight") {
  const WordCloudOptions opt;
  CHECK(unclamped_font_size(4, 4, opt) == doctest::Approx(2 * unclamped_font_size(1, 4, opt)).epsilon(1e-15));
  const auto cloud = layout_wordcloud({{"a", 4.0}, {"b", 1.0}}, opt);
  CHECK(cloud.words[0].label == "a");
  CHECK(cloud.words[0].font_size == doctest::Approx(2 * cloud.words[1].font_size).epsilon(1e-15));
}

TEST_CASE("random clouds have no overlaps and monotone fonts") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    const auto weights = random_weights(rng, 20 + 15 * trial);
    const auto cloud = layout_wordcloud(weights);
    REQUIRE(cloud.words.size() == weights.size());
    const WordCloudOptions opt;
    for (std::size_t i = 0; i < cloud.words.size(); ++i) {
      const auto& a = cloud.words[i];
      CHECK(a.x >= 0);
      CHECK(a.y >= 0);
      CHECK(a.x + a.w <= opt.width);
      CHECK(a.y + a.h <= opt.height);
      for (std::size_t j = i + 1; j < cloud.words.size(); ++j) {
        const auto& b = cloud.words[j];
        CHECK_FALSE(a.intersects(b));
        CHECK(a.weight >= b.weight);
        CHECK(a.font_size >= b.font_size);
      }
    }
  }
}

TEST_CASE("word cloud output is deterministic") {
  std::mt19937_64 rng(17);
  const auto weights = random_weights(rng, 40);
  const auto svg = render_wordcloud_svg(weights);
  CHECK(svg == render_wordcloud_svg(weights));
  CHECK(count_of(svg, "<text") == 40);
}

TEST_CASE("placement errors name the word") {
  WordCloudOptions tiny;
  tiny.width = 60;
  tiny.height = 40;
  try {
    layout_wordcloud({{"an extremely long keyword label", 1.0}}, tiny);
    FAIL("expected a placement error");
  } catch (const PlacementError& e) {
    CHECK(e.label() == "an extremely long keyword label");
  }
  // Each word fits alone but the canvas cannot hold them all.
  std::map<std::string, double> many;
  for (int i = 0; i < 50; ++i) many["word" + std::to_string(i)] = 1.0 + i;
  try {
    layout_wordcloud(many, tiny);
    FAIL("expected a placement error");
  } catch (const PlacementError& e) {
    CHECK(many.contains(e.label()));
  }
}

TEST_CASE("word cloud input checks") {
  CHECK_THROWS_AS(layout_wordcloud({}), ContractError);
  CHECK_THROWS_AS(layout_wordcloud({{"a", 0.0}}), ContractError);
}

}  // TEST_SUITE
