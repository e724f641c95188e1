#include "atlas/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/relevance.hpp"

namespace atlas {

namespace {

namespace pt = boost::property_tree;

std::string strip_quotes(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto end = text.find(sep, start);
    auto part = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (!part.empty()) out.emplace_back(part);
    if (end == std::string_view::npos) return out;
    start = end + 1;
  }
}

// Hands out values and remembers which keys were read, so leftovers can be
// reported as unknown.
class Settings {
 public:
  explicit Settings(const pt::ptree& tree) : tree_(tree) {
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
      for (const auto& [key, value] : body) keys_.insert(section + "." + key);
    }
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    const auto path = section + "." + key;
    keys_.erase(path);
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!v) return std::nullopt;
    return strip_quotes(*v);
  }

  std::string text(const std::string& section, const std::string& key, std::string fallback) {
    auto v = raw(section, key);
    return v ? *v : fallback;
  }

  double real(const std::string& section, const std::string& key, double fallback) {
    auto v = raw(section, key);
    if (!v) return fallback;
    try {
      return csv::parse_double(*v, 0);
    } catch (const Error&) {
      throw ConfigError("config: " + section + "." + key + " must be a number, got '" + *v + "'");
    }
  }

  long long integer(const std::string& section, const std::string& key, long long fallback) {
    auto v = raw(section, key);
    if (!v) return fallback;
    try {
      return csv::parse_int(*v, 0);
    } catch (const Error&) {
      throw ConfigError("config: " + section + "." + key + " must be an integer, got '" + *v + "'");
    }
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) {
    auto v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw ConfigError("config: " + section + "." + key + " must be true or false, got '" + *v + "'");
  }

  // Keys of a free-form section, in file order.
  std::vector<std::pair<std::string, std::string>> section(const std::string& name) {
    std::vector<std::pair<std::string, std::string>> out;
    if (auto child = tree_.get_child_optional(pt::ptree::path_type(name, '.'))) {
      for (const auto& [key, value] : *child) {
        keys_.erase(name + "." + key);
        out.emplace_back(key, strip_quotes(value.data()));
      }
    }
    return out;
  }

  void reject_leftovers() const {
    if (!keys_.empty()) throw ConfigError("config: unknown key '" + *keys_.begin() + "'");
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> keys_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

}  // namespace

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  Settings s(tree);
  PipelineConfig c;

  auto path = [&](const std::string& key, bool required) -> std::filesystem::path {
    auto v = s.raw("paths", key);
    if (!v || v->empty()) {
      require(!required, "paths." + key + " is required");
      return {};
    }
    std::filesystem::path p(*v);
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
  };
  c.paths.mentions = path("mentions", true);
  c.paths.aliases = path("aliases", false);
  c.paths.keywords = path("keywords", false);
  c.paths.associations = path("associations", true);
  c.paths.cache = path("cache", true);
  c.paths.output = path("output", true);

  c.context.first = s.text("openalex", "context_a", c.context.first);
  c.context.second = s.text("openalex", "context_b", c.context.second);
  require(!c.context.first.empty() && !c.context.second.empty(), "context phrases must be non-empty");
  const auto mode = s.text("openalex", "mode", "live");
  require(mode == "live" || mode == "offline", "openalex.mode must be live or offline");
  c.mode = mode == "offline" ? FetchMode::offline : FetchMode::live;
  c.mailto = s.text("openalex", "mailto", "");
  c.base_url = s.text("openalex", "base_url", c.base_url);
  auto& b = c.budget;
  b.requests_per_second = s.real("openalex", "requests_per_second", b.requests_per_second);
  b.max_requests = s.integer("openalex", "max_requests", b.max_requests);
  b.max_attempts = static_cast<int>(s.integer("openalex", "max_attempts", b.max_attempts));
  b.backoff_base_seconds = s.real("openalex", "backoff_base_seconds", b.backoff_base_seconds);
  b.backoff_factor = s.real("openalex", "backoff_factor", b.backoff_factor);
  b.concurrency = static_cast<int>(s.integer("openalex", "concurrency", b.concurrency));
  b.fail_fast = s.flag("openalex", "fail_fast", b.fail_fast);
  const auto max_age_days = s.integer("openalex", "max_age_days", -1);
  if (max_age_days >= 0) b.max_age = std::chrono::seconds(max_age_days * 86400);
  require(b.requests_per_second > 0, "openalex.requests_per_second must be positive");
  require(b.max_requests >= 0, "openalex.max_requests must be >= 0");
  require(b.max_attempts >= 1, "openalex.max_attempts must be >= 1");
  require(b.backoff_base_seconds >= 0 && b.backoff_factor >= 1, "bad openalex backoff settings");
  require(b.concurrency >= 1 && b.concurrency <= 64, "openalex.concurrency must be in [1, 64]");

  c.threshold = static_cast<int>(s.integer("scoring", "threshold", c.threshold));
  const auto top_n = s.integer("scoring", "top_n", static_cast<long long>(c.top_n));
  c.boost_function = s.text("scoring", "boost_function", c.boost_function);
  const auto exec = s.text("scoring", "execution", "serial");
  require(c.threshold >= 0, "scoring.threshold must be >= 0");
  require(top_n >= 1, "scoring.top_n must be >= 1");
  c.top_n = static_cast<std::size_t>(top_n);
  find_boost_function(c.boost_function);
  require(exec == "serial" || exec == "parallel", "scoring.execution must be serial or parallel");
  c.scoring = exec == "parallel" ? kernels::Execution::parallel : kernels::Execution::serial;

  const auto seed = s.integer("communities", "seed", static_cast<long long>(c.seed));
  require(seed >= 0, "communities.seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.resolution = s.real("communities", "resolution", c.resolution);
  require(c.resolution > 0, "communities.resolution must be positive");
  c.sweep_seeds = static_cast<int>(s.integer("communities", "sweep_seeds", c.sweep_seeds));
  require(c.sweep_seeds >= 0 && c.sweep_seeds <= 1000, "communities.sweep_seeds must be in [0, 1000]");

  auto& l = c.layout;
  l.spring = s.real("layout", "spring", l.spring);
  l.natural_length = s.real("layout", "natural_length", l.natural_length);
  l.repulsion = s.real("layout", "repulsion", l.repulsion);
  l.initial_step = s.real("layout", "initial_step", l.initial_step);
  l.cooling = s.real("layout", "cooling", l.cooling);
  l.max_iterations = static_cast<int>(s.integer("layout", "max_iterations", l.max_iterations));
  l.tolerance = s.real("layout", "tolerance", l.tolerance);
  l.kernel = parse_force_kernel(s.text("layout", "kernel", std::string(to_string(l.kernel))));
  l.theta = s.real("layout", "theta", l.theta);
  require(l.spring > 0 && l.natural_length > 0 && l.repulsion > 0, "layout constants must be positive");
  require(l.cooling > 0 && l.cooling <= 1, "layout.cooling must be in (0, 1]");
  require(l.max_iterations >= 0 && l.tolerance >= 0, "bad layout iteration limits");

  auto& st = c.style;
  if (auto v = s.raw("style", "palette")) st.palette = split(*v, ',');
  require(!st.palette.empty(), "style.palette must list at least one colour");
  st.width = s.real("style", "width", st.width);
  st.height = s.real("style", "height", st.height);
  st.label_size = s.real("style", "label_size", st.label_size);
  st.min_radius = s.real("style", "min_radius", st.min_radius);
  st.max_radius = s.real("style", "max_radius", st.max_radius);
  require(st.width > 0 && st.height > 0, "style canvas must be positive");
  require(st.min_radius > 0 && st.max_radius > st.min_radius, "style radii need 0 < min_radius < max_radius");
  auto& cl = c.cloud;
  cl.palette = st.palette;
  cl.width = s.real("style", "cloud_width", cl.width);
  cl.height = s.real("style", "cloud_height", cl.height);
  cl.min_font = s.real("style", "cloud_min_font", cl.min_font);
  cl.max_font = s.real("style", "cloud_max_font", cl.max_font);
  require(cl.width > 0 && cl.height > 0, "style cloud canvas must be positive");
  require(cl.min_font > 0 && cl.max_font >= cl.min_font, "style cloud fonts need 0 < min <= max");

  for (const auto& [key, value] : s.section("annotations")) {
    // x1 y1 x2 y2 caption...
    std::istringstream fields(value);
    Annotation a;
    if (!(fields >> a.x1 >> a.y1 >> a.x2 >> a.y2)) {
      throw ConfigError("config: annotations." + key + " must be 'x1 y1 x2 y2 [caption]'");
    }
    std::getline(fields >> std::ws, a.text);
    st.annotations.push_back(std::move(a));
  }

  s.reject_leftovers();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  return parse_config(in, std::filesystem::absolute(file).parent_path());
}

std::string PipelineConfig::resolved() const {
  std::string out;
  auto kv = [&](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  out += "[paths]\n";
  kv("mentions", paths.mentions.string());
  kv("aliases", paths.aliases.string());
  kv("keywords", paths.keywords.string());
  kv("associations", paths.associations.string());
  kv("cache", paths.cache.string());
  kv("output", paths.output.string());
  out += "\n[openalex]\n";
  kv("context_a", context.first);
  kv("context_b", context.second);
  kv("mode", mode == FetchMode::offline ? "offline" : "live");
  kv("mailto", mailto);
  kv("base_url", base_url);
  kv("requests_per_second", budget.requests_per_second);
  kv("max_requests", budget.max_requests);
  kv("max_attempts", budget.max_attempts);
  kv("backoff_base_seconds", budget.backoff_base_seconds);
  kv("backoff_factor", budget.backoff_factor);
  kv("concurrency", budget.concurrency);
  kv("fail_fast", budget.fail_fast ? "true" : "false");
  kv("max_age_days", budget.max_age ? budget.max_age->count() / 86400 : -1);
  out += "\n[scoring]\n";
  kv("threshold", threshold);
  kv("top_n", top_n);
  kv("boost_function", boost_function);
  kv("execution", scoring == kernels::Execution::parallel ? "parallel" : "serial");
  out += "\n[communities]\n";
  kv("seed", seed);
  kv("resolution", resolution);
  kv("sweep_seeds", sweep_seeds);
  out += "\n[layout]\n";
  kv("spring", layout.spring);
  kv("natural_length", layout.natural_length);
  kv("repulsion", layout.repulsion);
  kv("initial_step", layout.initial_step);
  kv("cooling", layout.cooling);
  kv("max_iterations", layout.max_iterations);
  kv("tolerance", layout.tolerance);
  kv("kernel", to_string(layout.kernel));
  kv("theta", layout.theta);
  out += "\n[style]\n";
  kv("palette", join(style.palette));
  kv("width", style.width);
  kv("height", style.height);
  kv("label_size", style.label_size);
  kv("min_radius", style.min_radius);
  kv("max_radius", style.max_radius);
  kv("cloud_width", cloud.width);
  kv("cloud_height", cloud.height);
  kv("cloud_min_font", cloud.min_font);
  kv("cloud_max_font", cloud.max_font);
  if (!style.annotations.empty()) {
    out += "\n[annotations]\n";
    int i = 0;
    for (const auto& a : style.annotations) {
      out += fmt::format("arrow{} = {} {} {} {} {}\n", ++i, a.x1, a.y1, a.x2, a.y2, a.text);
    }
  }
  return out;
}

}  // namespace atlas
