#pragma once

// Pipeline configuration: one INI-style key/value file with fixed sections
// [paths] [openalex] [scoring] [communities] [layout] [style] [annotations].
// Relative paths resolve against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "atlas/kernels.hpp"
#include "atlas/layout.hpp"
#include "atlas/openalex.hpp"
#include "atlas/render.hpp"

namespace atlas {

inline constexpr const char* kMailtoEnv = "ATLAS_MAILTO";

struct PipelinePaths {
  std::filesystem::path mentions;
  std::filesystem::path aliases;   // optional
  std::filesystem::path keywords;  // optional curated list without mentions
  std::filesystem::path associations;
  std::filesystem::path cache;
  std::filesystem::path output;
};

struct PipelineConfig {
  PipelinePaths paths;

  ContextPair context = kDefaultContext;
  FetchMode mode = FetchMode::live;
  std::string mailto;
  std::string base_url = "https://api.openalex.org";
  RateBudget budget;

  int threshold = 3;
  std::size_t top_n = 73;
  std::string boost_function = "lift";
  kernels::Execution scoring = kernels::Execution::serial;

  std::uint64_t seed = 1;
  double resolution = 1.0;
  int sweep_seeds = 20;  // seeds 0..n-1 summarized in communities/seed_sweep.csv

  LayoutParams layout;
  StyleSpec style;
  WordCloudOptions cloud;

  // Canonical INI text of every resolved value. Written with each run and hashed for gating.
  std::string resolved() const;
};

// Throws ConfigError on unknown keys, unparsable values, or out-of-range settings.
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& file);

}  // namespace atlas
