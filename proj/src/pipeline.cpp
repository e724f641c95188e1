#include "atlas/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "atlas/catalog.hpp"
#include "atlas/communities.hpp"
#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/export.hpp"
#include "atlas/graph.hpp"
#include "atlas/hashing.hpp"
#include "atlas/http_transport.hpp"
#include "atlas/layout.hpp"
#include "atlas/relevance.hpp"
#include "atlas/render.hpp"

namespace atlas {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr Stage kOrder[] = {Stage::ingest, Stage::harvest, Stage::score,  Stage::build,
                            Stage::detect, Stage::layout,  Stage::render, Stage::export_};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary file so a crash never leaves a half-written artifact.
void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

template <class Fn>
std::string render_to_string(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

// Which stage produces each artifact, for dependency errors.
Stage producer_of(std::string_view artifact) {
  using namespace artifacts;
  static const std::map<std::string_view, Stage> kProducer = {
      {kKeywords, Stage::ingest},          {kMentionRanking, Stage::ingest},   {kHarvestReport, Stage::harvest},
      {kRelevanceScores, Stage::score},    {kRelevanceRanking, Stage::score},  {kRelevanceMeta, Stage::score},
      {kNodes, Stage::build},              {kEdges, Stage::build},             {kIsolated, Stage::build},
      {kPartition, Stage::detect},         {kPartitionMeta, Stage::detect},    {kSeedSweep, Stage::detect},
      {kLayout, Stage::layout},            {kLayoutMeta, Stage::layout},       {kGroupedLayout, Stage::layout},
      {kGroupedLayoutMeta, Stage::layout}, {kNetworkSvg, Stage::render},       {kCommunitiesSvg, Stage::render},
      {kMentionCloud, Stage::render},      {kRelevanceCloud, Stage::render},   {kExplorer, Stage::export_},
  };
  return kProducer.at(artifact);
}

struct Input {
  enum class Kind { artifact, required_file, optional_file, cache };
  Kind kind;
  std::string name;  // artifact path relative to the output dir, or a config key
  fs::path path;
};

struct StageSpec {
  std::vector<Input> inputs;
  std::vector<std::string> outputs;
};

}  // namespace

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::ingest:
      return "ingest";
    case Stage::harvest:
      return "harvest";
    case Stage::score:
      return "score";
    case Stage::build:
      return "build";
    case Stage::detect:
      return "detect";
    case Stage::layout:
      return "layout";
    case Stage::render:
      return "render";
    case Stage::export_:
      return "export";
    case Stage::all:
      return "all";
  }
  return "all";
}

Stage parse_stage(std::string_view name) {
  for (auto s : kOrder) {
    if (to_string(s) == name) return s;
  }
  if (name == "all") return Stage::all;
  throw ConfigError("unknown stage '" + std::string(name) +
                    "' (ingest, harvest, score, build, detect, layout, render, export, all)");
}

std::span<const Stage> stage_order() noexcept { return kOrder; }

struct Pipeline::Context {
  fs::path out;
  Json state = Json::object();
  std::int64_t requests = 0;
  std::unique_ptr<Clock> own_clock;
  std::unique_ptr<Transport> own_transport;

  fs::path at(std::string_view rel) const { return out / fs::path(rel); }
};

Pipeline::Pipeline(PipelineConfig config, Transport* transport, Clock* clock)
    : config_(std::move(config)), transport_(transport), clock_(clock) {}

namespace {

StageSpec spec_for(Stage stage, const PipelineConfig& c) {
  using namespace artifacts;
  using K = Input::Kind;
  auto art = [](const char* rel) { return Input{K::artifact, rel, {}}; };
  switch (stage) {
    case Stage::ingest:
      return {{{K::required_file, "paths.mentions", c.paths.mentions},
               {K::optional_file, "paths.aliases", c.paths.aliases},
               {K::optional_file, "paths.keywords", c.paths.keywords}},
              {kKeywords, kMentionRanking}};
    case Stage::harvest:
      return {{art(kKeywords), {K::required_file, "paths.associations", c.paths.associations},
               {K::optional_file, "paths.aliases", c.paths.aliases}, {K::optional_file, "paths.cache", c.paths.cache}},
              {kHarvestReport}};
    case Stage::score:
      return {{art(kKeywords), {K::cache, "paths.cache", c.paths.cache}},
              {kRelevanceScores, kRelevanceRanking, kRelevanceMeta}};
    case Stage::build:
      return {{art(kKeywords), art(kRelevanceScores), {K::required_file, "paths.associations", c.paths.associations},
               {K::optional_file, "paths.aliases", c.paths.aliases}, {K::cache, "paths.cache", c.paths.cache}},
              {kNodes, kEdges, kIsolated}};
    case Stage::detect:
      return {{art(kNodes), art(kEdges)}, {kPartition, kPartitionMeta, kSeedSweep}};
    case Stage::layout:
      return {{art(kNodes), art(kEdges), art(kPartition), art(kPartitionMeta)},
              {kLayout, kLayoutMeta, kGroupedLayout, kGroupedLayoutMeta}};
    case Stage::render:
      return {{art(kKeywords), art(kRelevanceScores), art(kNodes), art(kEdges), art(kPartition), art(kPartitionMeta),
               art(kLayout), art(kLayoutMeta), art(kGroupedLayout), art(kGroupedLayoutMeta)},
              {kNetworkSvg, kCommunitiesSvg, kMentionCloud, kRelevanceCloud}};
    case Stage::export_:
      return {{art(kNodes), art(kEdges), art(kPartition), art(kPartitionMeta), art(kLayout), art(kLayoutMeta),
               art(kRelevanceMeta)},
              {kExplorer}};
    case Stage::all:
      break;
  }
  throw ContractError("no spec for stage 'all'");
}

// Loaders shared by several stages.
struct Loaded {
  const fs::path& out;
  const PipelineConfig& config;

  std::ifstream open(std::string_view rel) const {
    std::ifstream in(out / fs::path(rel));
    if (!in) throw ConfigError("cannot read " + (out / fs::path(rel)).string());
    return in;
  }
  std::string text(std::string_view rel) const { return read_file(out / fs::path(rel)); }

  KeywordSet keywords() const {
    auto in = open(artifacts::kKeywords);
    return read_keywords_csv(in);
  }
  AliasTable aliases() const {
    if (config.paths.aliases.empty() || !fs::exists(config.paths.aliases)) return {};
    std::ifstream in(config.paths.aliases);
    return parse_aliases(in);
  }
  HitStore cache() const { return HitStore::load(config.paths.cache); }
  KeywordGraph graph() const {
    auto nodes = open(artifacts::kNodes);
    auto edges = open(artifacts::kEdges);
    return read_graph_csv(nodes, edges);
  }
  Partition partition(const KeywordGraph& g) const {
    auto in = open(artifacts::kPartition);
    return read_partition(in, text(artifacts::kPartitionMeta), g);
  }
  LayoutResult layout(const KeywordGraph& g, const char* csv_rel, const char* meta_rel) const {
    auto in = open(csv_rel);
    return read_layout(in, text(meta_rel), g);
  }
  std::vector<AssociationCandidate> associations(const KeywordSet& keywords) const {
    std::ifstream in(config.paths.associations);
    if (!in) throw ConfigError("cannot read " + config.paths.associations.string());
    return load_associations(in, keywords, aliases());
  }
  std::map<KeywordId, double> scores(const KeywordSet& keywords) const {
    auto in = open(artifacts::kRelevanceScores);
    std::map<KeywordId, double> out_scores;
    for (const auto& row : read_relevance_csv(in)) {
      auto id = keywords.find(row.keyword);
      if (!id) throw DependencyError("score", "relevance scores are stale ('" + row.keyword + "' is not a keyword); run 'score' first");
      out_scores[*id] = row.score;
    }
    if (out_scores.size() != keywords.size()) {
      throw DependencyError("score", "relevance scores do not cover every keyword; run 'score' first");
    }
    return out_scores;
  }
};

}  // namespace

StageReport Pipeline::run_one(Stage stage, Context& ctx) {
  const auto started = std::chrono::steady_clock::now();
  const auto spec = spec_for(stage, config_);
  const std::string name(to_string(stage));
  StageReport report;
  report.stage = stage;

  for (const auto& in : spec.inputs) {
    switch (in.kind) {
      case Input::Kind::artifact:
        if (!fs::exists(ctx.at(in.name))) {
          const auto producer = std::string(to_string(producer_of(in.name)));
          throw DependencyError(producer, "stage '" + name + "' needs " + in.name + "; run '" + producer + "' first");
        }
        break;
      case Input::Kind::required_file:
        if (!fs::exists(in.path)) throw ConfigError(in.name + ": file not found: " + in.path.string());
        break;
      case Input::Kind::cache:
        if (!fs::exists(in.path)) {
          throw DependencyError("harvest", "stage '" + name + "' needs the hit cache " + in.path.string() +
                                               "; run 'harvest' first");
        }
        break;
      case Input::Kind::optional_file:
        break;
    }
  }

  auto fingerprint = [&] {
    std::string material = name + "\n" + config_.resolved();
    report.inputs.clear();
    for (const auto& in : spec.inputs) {
      const auto path = in.kind == Input::Kind::artifact ? ctx.at(in.name) : in.path;
      const std::string& key = in.name;
      const std::string hash = (!path.empty() && fs::exists(path)) ? file_sha256(path) : "absent";
      report.inputs[key] = hash;
      material += key + "=" + hash + "\n";
    }
    return sha256_hex(material);
  };

  // Skip when nothing this stage reads has changed and its outputs are intact.
  report.fingerprint = fingerprint();
  if (ctx.state.contains(name)) {
    const auto& prev = ctx.state[name];
    bool intact = prev.value("fingerprint", "") == report.fingerprint;
    for (const auto& rel : spec.outputs) {
      if (!intact) break;
      const auto p = ctx.at(rel);
      intact = fs::exists(p) && prev.contains("outputs") && prev["outputs"].value(rel, "") == file_sha256(p);
    }
    if (intact) {
      report.skipped = true;
      for (const auto& rel : spec.outputs) report.outputs[rel] = prev["outputs"][rel].get<std::string>();
      return report;
    }
  }

  const Loaded load{ctx.out, config_};
  auto emit = [&](const char* rel, const std::string& content) { write_file(ctx.at(rel), content); };
  auto& warnings = report.warnings;

  switch (stage) {
    case Stage::ingest: {
      std::ifstream mentions_in(config_.paths.mentions);
      const auto records = parse_mentions(mentions_in);
      const auto aliases = load.aliases();
      std::vector<std::string> curated;
      if (!config_.paths.keywords.empty()) {
        std::ifstream kw_in(config_.paths.keywords);
        if (!kw_in) throw ConfigError("paths.keywords: file not found: " + config_.paths.keywords.string());
        for (const auto& raw : parse_keyword_list(kw_in)) curated.push_back(normalize_keyword(raw, aliases));
      }
      const auto tally = tally_mentions(records, aliases, config_.threshold, curated);
      emit(artifacts::kKeywords, render_to_string([&](auto& o) { write_keywords_csv(o, tally.keywords); }));
      emit(artifacts::kMentionRanking,
           render_to_string([&](auto& o) { write_mention_ranking_csv(o, tally.keywords, tally.ranking); }));
      break;
    }

    case Stage::harvest: {
      const auto keywords = load.keywords();
      const auto pairs = candidate_pairs(load.associations(keywords));
      HitStore store = fs::exists(config_.paths.cache) ? load.cache() : HitStore{};
      if (!clock_ && !ctx.own_clock) ctx.own_clock = std::make_unique<SystemClock>();
      Clock& clock = clock_ ? *clock_ : *ctx.own_clock;
      Transport* transport = transport_;
      if (!transport && config_.mode == FetchMode::live) {
        if (!ctx.own_transport) ctx.own_transport = std::make_unique<HttplibTransport>(config_.base_url);
        transport = ctx.own_transport.get();
      }
      if (config_.mode == FetchMode::live && config_.mailto.empty()) {
        warnings.push_back("no contact email configured; set openalex.mailto or ATLAS_MAILTO");
      }
      OpenAlexClient client(transport, clock, config_.budget, config_.mailto, config_.seed);
      const auto before = store.serialize();
      HarvestReport hr;
      try {
        hr = harvest(keywords, pairs, config_.context, store, client, config_.mode);
      } catch (...) {
        ctx.requests += client.requests_issued();
        if (config_.mode == FetchMode::live && store.serialize() != before) store.save(config_.paths.cache);
        throw;
      }
      ctx.requests += client.requests_issued();
      if (config_.mode == FetchMode::live && store.serialize() != before) store.save(config_.paths.cache);

      Json doc;
      doc["planned"] = hr.planned;
      doc["cached"] = hr.cached;
      doc["fetched"] = hr.fetched;
      doc["failures"] = Json::array();
      std::vector<std::string> missing;
      for (const auto& f : hr.failures) {
        doc["failures"].push_back(Json{{"query", f.query}, {"message", f.message}});
        if (f.replay_miss) missing.push_back(f.query);
      }
      emit(artifacts::kHarvestReport, doc.dump(2) + "\n");
      if (!missing.empty()) throw ReplayError(missing);
      if (!hr.failures.empty()) {
        throw ServiceError(fmt::format("{} of {} queries failed; see {}", hr.failures.size(), hr.planned,
                                       ctx.at(artifacts::kHarvestReport).string()));
      }
      break;
    }

    case Stage::score: {
      const auto keywords = load.keywords();
      const auto store = load.cache();
      const auto& fn = find_boost_function(config_.boost_function);
      const auto scores = score_all(keywords, store, config_.context, fn, config_.scoring);
      for (auto& w : check_narrowing(keywords, scores)) warnings.push_back(std::move(w));
      const auto full = rank_by_relevance(scores);
      const auto top = rank_by_relevance(scores, config_.top_n);
      emit(artifacts::kRelevanceScores,
           render_to_string([&](auto& o) { write_relevance_csv(o, keywords, full, scores); }));
      emit(artifacts::kRelevanceRanking,
           render_to_string([&](auto& o) { write_relevance_csv(o, keywords, top, scores); }));
      // Timestamp of the newest count the scores rest on; stands in for a
      // wall-clock "generated at" so reruns stay byte-identical.
      TimePoint newest{};
      for (const auto& q : plan_queries(keywords, {}, config_.context)) {
        if (auto rec = store.find(q.render())) newest = std::max(newest, rec->fetched_at);
      }
      Json meta;
      meta["boost_function"] = config_.boost_function;
      meta["context"] = {config_.context.first, config_.context.second};
      meta["top_n"] = config_.top_n;
      meta["data_as_of"] = format_timestamp(newest);
      emit(artifacts::kRelevanceMeta, meta.dump(2) + "\n");
      break;
    }

    case Stage::build: {
      const auto keywords = load.keywords();
      const auto scores = load.scores(keywords);
      const auto allowlist = load.associations(keywords);
      const auto store = load.cache();
      auto built = build_graph(keywords, scores, store, allowlist);
      if (built.graph.empty()) throw BuildError("no accepted association has positive weight; the graph is empty");
      for (auto& w : built.warnings) warnings.push_back(std::move(w));
      emit(artifacts::kNodes, render_to_string([&](auto& o) { write_nodes_csv(o, built.graph); }));
      emit(artifacts::kEdges, render_to_string([&](auto& o) { write_edges_csv(o, built.graph); }));
      std::string isolated = "keyword\n";
      for (auto id : built.isolated) isolated += csv::quote(keywords[id].canonical) + "\n";
      emit(artifacts::kIsolated, isolated);
      break;
    }

    case Stage::detect: {
      const auto graph = load.graph();
      LouvainTrace trace;
      const auto partition = louvain(graph, config_.seed, config_.resolution, &trace);
      if (trace.degenerate) warnings.push_back("graph has no edge weight; every keyword is its own community");
      emit(artifacts::kPartition, render_to_string([&](auto& o) { write_partition_csv(o, graph, partition); }));
      emit(artifacts::kPartitionMeta, partition_metadata_json(partition));
      std::string sweep = "seed,community_count,q\n";
      for (int s = 0; s < config_.sweep_seeds; ++s) {
        const auto p = louvain(graph, static_cast<std::uint64_t>(s), config_.resolution);
        sweep += fmt::format("{},{},{}\n", s, p.community_count, csv::format_double(p.q));
      }
      emit(artifacts::kSeedSweep, sweep);
      break;
    }

    case Stage::layout: {
      const auto graph = load.graph();
      const auto partition = load.partition(graph);
      const auto spring = spring_layout(graph, config_.seed, config_.layout);
      const auto grouped = grouped_layout(graph, partition, config_.seed, config_.layout);
      if (!spring.converged) {
        warnings.push_back(fmt::format("spring layout stopped at residual {} after {} iterations", spring.residual,
                                       spring.iterations));
      }
      if (!grouped.converged) warnings.push_back("grouped layout: a community did not reach the residual tolerance");
      emit(artifacts::kLayout, render_to_string([&](auto& o) { write_layout_csv(o, graph, spring); }));
      emit(artifacts::kLayoutMeta, layout_metadata_json(spring));
      emit(artifacts::kGroupedLayout, render_to_string([&](auto& o) { write_layout_csv(o, graph, grouped); }));
      emit(artifacts::kGroupedLayoutMeta, layout_metadata_json(grouped));
      break;
    }

    case Stage::render: {
      const auto keywords = load.keywords();
      const auto graph = load.graph();
      const auto partition = load.partition(graph);
      const auto spring = load.layout(graph, artifacts::kLayout, artifacts::kLayoutMeta);
      const auto grouped = load.layout(graph, artifacts::kGroupedLayout, artifacts::kGroupedLayoutMeta);
      emit(artifacts::kNetworkSvg, render_network_svg(graph, spring, partition, config_.style));
      StyleSpec plain = config_.style;
      plain.annotations.clear();
      emit(artifacts::kCommunitiesSvg, render_network_svg(graph, grouped, partition, plain));

      std::map<std::string, double> mention_weights;
      for (const auto& kw : keywords.all()) {
        if (kw.mention_count > 0) mention_weights[kw.canonical] = kw.mention_count;
      }
      std::map<std::string, double> relevance_weights;
      {
        auto in = load.open(artifacts::kRelevanceScores);
        for (const auto& row : read_relevance_csv(in)) {
          if (row.score > 0) relevance_weights[row.keyword] = row.score;
        }
      }
      if (mention_weights.empty()) {
        warnings.push_back("no keyword has mentions; mention word cloud skipped");
      } else {
        emit(artifacts::kMentionCloud, render_wordcloud_svg(mention_weights, config_.cloud));
      }
      if (relevance_weights.empty()) {
        warnings.push_back("no keyword has a positive relevance score; relevance word cloud skipped");
      } else {
        emit(artifacts::kRelevanceCloud, render_wordcloud_svg(relevance_weights, config_.cloud));
      }
      break;
    }

    case Stage::export_: {
      const auto graph = load.graph();
      const auto partition = load.partition(graph);
      const auto spring = load.layout(graph, artifacts::kLayout, artifacts::kLayoutMeta);
      const auto meta = nlohmann::json::parse(load.text(artifacts::kRelevanceMeta), nullptr, false);
      if (meta.is_discarded() || !meta.contains("boost_function") || !meta.contains("data_as_of")) {
        throw DependencyError("score", std::string(artifacts::kRelevanceMeta) + " is malformed; run 'score' first");
      }
      ExportMeta em;
      em.generated_at = meta["data_as_of"].get<std::string>();
      em.seed = partition.seed;
      em.resolution = partition.resolution;
      em.boost_function = meta["boost_function"].get<std::string>();
      em.q = partition.q;
      emit(artifacts::kExplorer, export_explorer_json(make_explorer_export(graph, spring, partition, em)));
      break;
    }

    case Stage::all:
      throw ContractError("run_one does not take Stage::all");
  }

  // The harvest may have rewritten the cache; fingerprint what the next run will see.
  report.fingerprint = fingerprint();
  Json outputs = Json::object();
  for (const auto& rel : spec.outputs) {
    const auto p = ctx.at(rel);
    if (!fs::exists(p)) continue;  // optional outputs such as a skipped word cloud
    report.outputs[rel] = file_sha256(p);
    outputs[rel] = report.outputs[rel];
  }
  ctx.state[name] = Json{{"fingerprint", report.fingerprint}, {"outputs", outputs}};
  write_file(ctx.at(artifacts::kState), ctx.state.dump(2) + "\n");
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

RunReport Pipeline::run(Stage stage) {
  Context ctx;
  ctx.out = config_.paths.output;
  fs::create_directories(ctx.out);
  if (fs::exists(ctx.at(artifacts::kState))) {
    auto parsed = Json::parse(read_file(ctx.at(artifacts::kState)), nullptr, false);
    if (parsed.is_object()) ctx.state = std::move(parsed);
  }
  const auto resolved = config_.resolved();
  write_file(ctx.at(artifacts::kResolvedConfig), resolved);

  RunReport report;
  report.config_hash = sha256_hex(resolved);
  report.seed = config_.seed;
  auto finish = [&] {
    report.requests = ctx.requests;
    write_file(ctx.at(artifacts::kRunReport), run_report_json(report));
  };
  try {
    if (stage == Stage::all) {
      for (auto s : kOrder) report.stages.push_back(run_one(s, ctx));
    } else {
      report.stages.push_back(run_one(stage, ctx));
    }
  } catch (...) {
    finish();
    throw;
  }
  finish();
  return report;
}

std::string run_report_json(const RunReport& report) {
  Json doc;
  doc["config_hash"] = report.config_hash;
  doc["seed"] = report.seed;
  doc["requests"] = report.requests;
  doc["stages"] = Json::array();
  for (const auto& s : report.stages) {
    doc["stages"].push_back(Json{{"stage", to_string(s.stage)},
                                 {"status", s.skipped ? "skipped" : "ran"},
                                 {"seconds", s.seconds},
                                 {"fingerprint", s.fingerprint},
                                 {"inputs", s.inputs},
                                 {"outputs", s.outputs},
                                 {"warnings", s.warnings}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace atlas
