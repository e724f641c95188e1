#pragma once

// Staged pipeline: ingest -> harvest -> score -> build -> detect -> layout ->
// render -> export. Each stage reads declared inputs and writes declared
// outputs under the output directory; a stage whose input fingerprint and
// outputs are unchanged since its last run is skipped.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/config.hpp"
#include "atlas/openalex.hpp"

namespace atlas {

enum class Stage { ingest, harvest, score, build, detect, layout, render, export_, all };

std::string_view to_string(Stage stage) noexcept;
// Throws ConfigError for an unknown name.
Stage parse_stage(std::string_view name);
// The eight concrete stages in run order.
std::span<const Stage> stage_order() noexcept;

// Output paths, relative to the output directory.
namespace artifacts {
inline constexpr const char* kKeywords = "rankings/keywords.csv";
inline constexpr const char* kMentionRanking = "rankings/mention_ranking.csv";
inline constexpr const char* kHarvestReport = "rankings/harvest_report.json";
inline constexpr const char* kRelevanceScores = "rankings/relevance_scores.csv";
inline constexpr const char* kRelevanceRanking = "rankings/relevance_ranking.csv";
inline constexpr const char* kRelevanceMeta = "rankings/relevance.json";
inline constexpr const char* kNodes = "graph/nodes.csv";
inline constexpr const char* kEdges = "graph/edges.csv";
inline constexpr const char* kIsolated = "graph/isolated.csv";
inline constexpr const char* kPartition = "communities/partition.csv";
inline constexpr const char* kPartitionMeta = "communities/partition.json";
inline constexpr const char* kSeedSweep = "communities/seed_sweep.csv";
inline constexpr const char* kLayout = "graph/layout.csv";
inline constexpr const char* kLayoutMeta = "graph/layout.json";
inline constexpr const char* kGroupedLayout = "communities/layout_grouped.csv";
inline constexpr const char* kGroupedLayoutMeta = "communities/layout_grouped.json";
inline constexpr const char* kNetworkSvg = "figures/network.svg";
inline constexpr const char* kCommunitiesSvg = "figures/communities.svg";
inline constexpr const char* kMentionCloud = "figures/mention_cloud.svg";
inline constexpr const char* kRelevanceCloud = "figures/relevance_cloud.svg";
inline constexpr const char* kExplorer = "export/explorer.json";
// Bookkeeping, not artifacts: excluded from determinism comparisons.
inline constexpr const char* kState = ".atlas_state.json";
inline constexpr const char* kRunReport = "run_report.json";
inline constexpr const char* kResolvedConfig = "resolved_config.ini";
}  // namespace artifacts

struct StageReport {
  Stage stage;
  bool skipped = false;
  double seconds = 0;
  std::string fingerprint;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path relative to output dir -> sha256
  std::vector<std::string> warnings;
};

struct RunReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::int64_t requests = 0;
  std::vector<StageReport> stages;
};

class Pipeline {
 public:
  // `transport` and `clock` are for tests; a live harvest without a transport
  // opens HTTPS connections to the configured base URL.
  explicit Pipeline(PipelineConfig config, Transport* transport = nullptr, Clock* clock = nullptr);

  // Runs one stage, or every stage in order for Stage::all. Writes the
  // resolved config and run report into the output directory.
  RunReport run(Stage stage);

  const PipelineConfig& config() const noexcept { return config_; }

 private:
  struct Context;
  StageReport run_one(Stage stage, Context& ctx);

  PipelineConfig config_;
  Transport* transport_;
  Clock* clock_;
};

std::string run_report_json(const RunReport& report);

}  // namespace atlas
