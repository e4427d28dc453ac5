#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curie/experiment.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    const std::string token = list.substr(start, comma - start);
    if (!token.empty()) seeds.push_back(std::stoull(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) throw curie::ConfigError("--seeds: empty list");
  return seeds;
}

curie::ExperimentConfig resolve_config(const std::string& config_path,
                                       const std::string& preset,
                                       const std::string& seeds) {
  curie::ExperimentConfig config;
  if (!preset.empty()) {
    if (preset != "paper-suite") throw curie::ConfigError("unknown preset: " + preset);
    config = curie::paper_suite_config();
  } else if (!config_path.empty()) {
    config = curie::load_config_file(config_path);
  } else {
    throw curie::ConfigError("either --config or --preset is required");
  }
  if (!seeds.empty()) config.seeds = parse_seed_list(seeds);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cellular-automaton concept-drift detection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string seeds;
  std::string preset;
  std::string results_path;
  std::string snapshot_path;
  int parallel = 1;
  std::int64_t snapshot_every = 0;

  CLI::App* generate = app.add_subcommand("generate", "write dataset CSVs and a manifest");
  generate->add_option("--config", config_path, "experiment config file (JSON)");
  generate->add_option("--preset", preset, "built-in config (paper-suite)");
  generate->add_option("--out", out_dir, "output directory")->required();
  generate->add_option("--seeds", seeds, "comma-separated seed list override");

  CLI::App* run = app.add_subcommand("run", "execute the learning-detection runs");
  run->add_option("--config", config_path, "experiment config file (JSON)");
  run->add_option("--preset", preset, "built-in config (paper-suite)");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seeds", seeds, "comma-separated seed list override");
  run->add_option("--parallel", parallel, "worker threads per stream");
  run->add_option("--snapshot-every", snapshot_every,
                  "write a detector snapshot every K evaluated steps (cellular only)");

  CLI::App* inspect = app.add_subcommand("inspect", "render a detector snapshot");
  inspect->add_option("snapshot", snapshot_path, "snapshot file")->required();

  CLI::App* rank = app.add_subcommand("rank", "recompute rank tables from a results CSV");
  rank->add_option("--results", results_path, "results.csv from a previous run")->required();
  rank->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are configuration errors
  }

  try {
    if (generate->parsed()) {
      const auto config = resolve_config(config_path, preset, seeds);
      const auto files = curie::cmd_generate(config, out_dir);
      std::printf("wrote %zu dataset file(s) + manifest.json to %s\n", files.size(),
                  out_dir.c_str());
      return 0;
    }
    if (run->parsed()) {
      auto config = resolve_config(config_path, preset, seeds);
      if (snapshot_every > 0) config.snapshot_every = snapshot_every;
      curie::ExperimentOutput output;
      const int code = curie::cmd_run(config, out_dir, parallel, &output);
      std::printf("completed %zu run(s), %zu failure(s); results in %s\n",
                  output.rows.size(), output.failures.size(), out_dir.c_str());
      return code;
    }
    if (inspect->parsed()) {
      return curie::cmd_inspect(snapshot_path, std::cout);
    }
    if (rank->parsed()) {
      return curie::cmd_rank(results_path, out_dir);
    }
  } catch (const curie::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    // Input/parse problems count as configuration errors; anything that
    // happens mid-run is a run failure.
    return run->parsed() ? 2 : 1;
  }
  return 0;
}
