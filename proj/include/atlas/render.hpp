#pragma once

// SVG output: network diagrams and word clouds. All output is byte-deterministic.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/communities.hpp"
#include "atlas/graph.hpp"
#include "atlas/layout.hpp"

namespace atlas {

// Community colours in order: orange, yellow, purple, green, then a few extras.
std::vector<std::string> default_palette();

// Hand-placed arrow with a caption, in canvas pixels. Drawn over the network.
struct Annotation {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  std::string text;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct StyleSpec {
  std::vector<std::string> palette = default_palette();  // cycled when shorter than the community count
  double width = 1600;
  double height = 1200;
  double padding = 60;
  double min_radius = 3;
  double max_radius = 18;
  double min_stroke = 0.3;
  double max_stroke = 4;
  double label_size = 10;
  std::string font_family = "Helvetica, Arial, sans-serif";
  std::string edge_color = "#9a9a9a";
  std::vector<Annotation> annotations;
};

// min_radius + (max_radius - min_radius) * sqrt(score / max_score); strictly increasing in score.
double node_radius(double score, double max_score, const StyleSpec& style);
double edge_stroke(double weight, double max_weight, const StyleSpec& style);
const std::string& community_color(std::uint32_t community, const StyleSpec& style);

std::string xml_escape(std::string_view text);

std::string render_network_svg(const KeywordGraph& graph, const LayoutResult& layout, const Partition& partition,
                               const StyleSpec& style = {});

struct WordCloudOptions {
  double width = 1200;
  double height = 800;
  double min_font = 10;
  double max_font = 72;
  double padding = 2;          // clearance between word boxes
  double char_width = 0.62;    // advance per character, in em (monospace face)
  double line_height = 1.2;    // box height, in em
  double spiral_spacing = 6;   // radial gap between spiral turns, px
  double spiral_arc_step = 2;  // arc length between probes, px
  double shrink = 0.9;         // global font scale applied when a word does not fit
  std::string font_family = "DejaVu Sans Mono, Menlo, Consolas, monospace";
  std::vector<std::string> palette = default_palette();
};

struct PlacedWord {
  std::string label;
  double weight = 0;
  double font_size = 0;
  double x = 0;  // box top-left
  double y = 0;
  double w = 0;
  double h = 0;
  bool intersects(const PlacedWord& o) const noexcept {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
};

struct WordCloud {
  std::vector<PlacedWord> words;  // placement order: weight descending, then label
  double scale = 1.0;             // global font scale that made every word fit
  std::string svg;
};

// Font size before range clamping: max_font * sqrt(weight / max_weight).
double unclamped_font_size(double weight, double max_weight, const WordCloudOptions& options);

// Greedy largest-first placement along an Archimedean spiral from the canvas
// centre. Throws PlacementError naming the word that cannot be placed even at
// the minimum font size.
WordCloud layout_wordcloud(const std::map<std::string, double>& weights, const WordCloudOptions& options = {});
std::string render_wordcloud_svg(const std::map<std::string, double>& weights, const WordCloudOptions& options = {});

}  // namespace atlas
