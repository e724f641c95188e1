#include "atlas/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "atlas/error.hpp"

namespace atlas {

namespace {

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string svg_header(double width, double height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0:.0f}\" height=\"{1:.0f}\" fill=\"#ffffff\"/>\n",
      width, height);
}

}  // namespace

std::vector<std::string> default_palette() {
  return {"#f28e2b", "#edc948", "#b07aa1", "#59a14f", "#4e79a7", "#e15759", "#76b7b2", "#ff9da7", "#9c755f"};
}

double node_radius(double score, double max_score, const StyleSpec& style) {
  if (!(max_score > 0)) return style.min_radius;
  const double t = std::sqrt(std::clamp(score / max_score, 0.0, 1.0));
  return style.min_radius + (style.max_radius - style.min_radius) * t;
}

double edge_stroke(double weight, double max_weight, const StyleSpec& style) {
  if (!(max_weight > 0)) return style.min_stroke;
  return style.min_stroke + (style.max_stroke - style.min_stroke) * std::clamp(weight / max_weight, 0.0, 1.0);
}

const std::string& community_color(std::uint32_t community, const StyleSpec& style) {
  if (style.palette.empty()) throw ConfigError("style palette is empty");
  return style.palette[community % style.palette.size()];
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string render_network_svg(const KeywordGraph& graph, const LayoutResult& layout, const Partition& partition,
                               const StyleSpec& style) {
  const auto membership = membership_of(graph, partition);
  for (const auto& node : graph.nodes()) {
    if (!layout.positions.contains(node.id)) throw ContractError("layout does not place '" + node.label + "'");
  }
  const Bounds b = bounds_of(layout.positions);
  const double avail_w = style.width - 2 * style.padding;
  const double avail_h = style.height - 2 * style.padding;
  double scale = 1.0;
  if (b.width() > 0 || b.height() > 0) {
    scale = std::min(b.width() > 0 ? avail_w / b.width() : INFINITY, b.height() > 0 ? avail_h / b.height() : INFINITY);
  }
  const double cx = 0.5 * (b.min_x + b.max_x);
  const double cy = 0.5 * (b.min_y + b.max_y);
  auto to_canvas = [&](const Vec2& p) {
    return Vec2{style.width / 2 + (p.x - cx) * scale, style.height / 2 + (p.y - cy) * scale};
  };

  double max_score = 0;
  for (const auto& n : graph.nodes()) max_score = std::max(max_score, n.score);
  double max_weight = 0;
  for (const auto& e : graph.edges()) max_weight = std::max(max_weight, e.weight);

  std::string svg = svg_header(style.width, style.height);
  svg += fmt::format("<g stroke=\"{}\" stroke-opacity=\"0.6\" stroke-linecap=\"round\">\n", style.edge_color);
  for (const auto& e : graph.edges()) {
    const auto p = to_canvas(layout.positions.at(e.a));
    const auto q = to_canvas(layout.positions.at(e.b));
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke-width=\"{:.3f}\"/>\n", p.x,
                       p.y, q.x, q.y, edge_stroke(e.weight, max_weight, style));
  }
  svg += "</g>\n<g stroke=\"#333333\" stroke-width=\"0.5\">\n";
  const auto nodes = graph.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = to_canvas(layout.positions.at(nodes[i].id));
    svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" data-community=\"{}\"/>\n", p.x,
                       p.y, node_radius(nodes[i].score, max_score, style), community_color(membership[i], style),
                       membership[i]);
  }
  svg += fmt::format("</g>\n<g font-family=\"{}\" font-size=\"{:.1f}\" fill=\"#222222\" text-anchor=\"middle\">\n",
                     xml_escape(style.font_family), style.label_size);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = to_canvas(layout.positions.at(nodes[i].id));
    const double r = node_radius(nodes[i].score, max_score, style);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", p.x, p.y - r - 2, xml_escape(nodes[i].label));
  }
  svg += "</g>\n";
  if (!style.annotations.empty()) {
    svg +=
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"8\" "
        "markerHeight=\"8\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#444444\"/></marker></defs>\n"
        "<g class=\"annotations\" stroke=\"#444444\" fill=\"#444444\">\n";
    for (const auto& a : style.annotations) {
      svg += fmt::format(
          "<path d=\"M{:.2f},{:.2f} L{:.2f},{:.2f}\" stroke-width=\"2\" fill=\"none\" marker-end=\"url(#arrow)\"/>\n",
          a.x1, a.y1, a.x2, a.y2);
      if (!a.text.empty()) {
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" stroke=\"none\" font-family=\"{}\" font-size=\"{:.1f}\">{}</text>\n",
                           a.x1, a.y1 - 4, xml_escape(style.font_family), 1.4 * style.label_size, xml_escape(a.text));
      }
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

double unclamped_font_size(double weight, double max_weight, const WordCloudOptions& options) {
  return options.max_font * std::sqrt(weight / max_weight);
}

WordCloud layout_wordcloud(const std::map<std::string, double>& weights, const WordCloudOptions& options) {
  if (weights.empty()) throw ContractError("word cloud needs at least one word");
  if (!(options.min_font > 0) || options.max_font < options.min_font) throw ConfigError("bad word cloud font range");
  if (!(options.shrink > 0 && options.shrink < 1)) throw ConfigError("word cloud shrink must be in (0, 1)");
  double max_weight = 0;
  for (const auto& [label, w] : weights) {
    if (!(w > 0) || !std::isfinite(w)) throw ContractError("word cloud weight for '" + label + "' must be positive");
    max_weight = std::max(max_weight, w);
  }
  std::vector<std::pair<std::string, double>> order(weights.begin(), weights.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  auto box_for = [&](const std::string& label, double font) {
    return std::pair{font * options.char_width * static_cast<double>(utf8_length(label)), font * options.line_height};
  };
  for (const auto& [label, w] : order) {
    const auto [bw, bh] = box_for(label, options.min_font);
    if (bw > options.width || bh > options.height) {
      throw PlacementError(label, "word '" + label + "' does not fit the canvas even at the minimum font size");
    }
  }

  const double cx = options.width / 2;
  const double cy = options.height / 2;
  const double aspect = options.height / options.width;
  const double max_radius = std::hypot(options.width, options.height) / 2;
  const double pitch = options.spiral_spacing / (2 * std::numbers::pi);

  double scale = 1.0;
  for (;;) {
    WordCloud cloud;
    cloud.scale = scale;
    std::string failed;
    for (const auto& [label, w] : order) {
      const double font = std::max(options.min_font, scale * unclamped_font_size(w, max_weight, options));
      const auto [bw, bh] = box_for(label, font);
      PlacedWord word{label, w, font, 0, 0, bw, bh};
      bool placed = false;
      for (double t = 0;;) {
        const double r = pitch * t;
        if (r > max_radius) break;
        word.x = cx + r * std::cos(t) - bw / 2;
        word.y = cy + aspect * r * std::sin(t) - bh / 2;
        const bool inside = word.x >= 0 && word.y >= 0 && word.x + bw <= options.width && word.y + bh <= options.height;
        if (inside) {
          PlacedWord padded = word;
          padded.x -= options.padding;
          padded.y -= options.padding;
          padded.w += 2 * options.padding;
          padded.h += 2 * options.padding;
          const bool clear = std::none_of(cloud.words.begin(), cloud.words.end(),
                                          [&](const PlacedWord& o) { return padded.intersects(o); });
          if (clear) {
            placed = true;
            break;
          }
        }
        t += std::min(0.5, options.spiral_arc_step / std::max(r, 1.0));
      }
      if (!placed) {
        failed = label;
        break;
      }
      cloud.words.push_back(word);
    }
    if (failed.empty()) return cloud;
    if (scale * options.max_font <= options.min_font) {
      throw PlacementError(failed, "word '" + failed + "' cannot be placed on a " + fmt::format("{:.0f}x{:.0f}", options.width, options.height) +
                                       " canvas even at the minimum font size");
    }
    scale *= options.shrink;
  }
}

std::string render_wordcloud_svg(const std::map<std::string, double>& weights, const WordCloudOptions& options) {
  auto cloud = layout_wordcloud(weights, options);
  std::string svg = svg_header(options.width, options.height);
  svg += fmt::format("<g font-family=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\">\n",
                     xml_escape(options.font_family));
  for (std::size_t i = 0; i < cloud.words.size(); ++i) {
    const auto& w = cloud.words[i];
    const auto& color = options.palette.empty() ? std::string("#333333") : options.palette[i % options.palette.size()];
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"{:.2f}\" fill=\"{}\">{}</text>\n", w.x + w.w / 2,
                       w.y + w.h / 2, w.font_size, color, xml_escape(w.label));
  }
  svg += "</g>\n</svg>\n";
  cloud.svg = std::move(svg);
  return cloud.svg;
}

}  // namespace atlas
