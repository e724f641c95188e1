// atlas <stage> --config <file> [--offline] [--seed N] [--mailto EMAIL]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "atlas/config.hpp"
#include "atlas/error.hpp"
#include "atlas/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Complex-systems keyword map pipeline"};
  std::string stage_name;
  std::string config_path;
  bool offline = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mailto;
  app.add_option("stage", stage_name, "ingest, harvest, score, build, detect, layout, render, export or all")
      ->required();
  app.add_option("--config", config_path, "pipeline config file")->required();
  app.add_flag("--offline", offline, "serve hit counts from the cache only; a miss is an error");
  app.add_option("--seed", seed, "seed for community detection and layout");
  app.add_option("--mailto", mailto, "contact email sent with catalogue requests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(atlas::ExitCode::config);
  }

  try {
    const auto stage = atlas::parse_stage(stage_name);
    auto config = atlas::load_config(config_path);
    if (offline) config.mode = atlas::FetchMode::offline;
    if (seed) config.seed = *seed;
    if (const char* env = std::getenv(atlas::kMailtoEnv); env && *env) config.mailto = env;
    if (mailto) config.mailto = *mailto;

    atlas::Pipeline pipeline(std::move(config));
    const auto report = pipeline.run(stage);
    for (const auto& s : report.stages) {
      std::cout << fmt::format("{:<8} {}", atlas::to_string(s.stage), s.skipped ? "skipped (unchanged)" : "ran");
      if (!s.skipped) std::cout << fmt::format(" in {:.2f} s", s.seconds);
      std::cout << '\n';
      for (const auto& w : s.warnings) std::cerr << "warning: " << atlas::to_string(s.stage) << ": " << w << '\n';
    }
    if (report.requests > 0) std::cout << report.requests << " catalogue requests issued\n";
    return 0;
  } catch (const atlas::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return static_cast<int>(atlas::ExitCode::internal);
  }
}
