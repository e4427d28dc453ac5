#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "curie/harness.hpp"
#include "curie/stats.hpp"
#include "curie/streams.hpp"

namespace curie {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearnerConfig {
  std::string kind = "nb";  // nb | knn
  int k = 5;
  int max_window_size = 50;

  friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

/// Detector parameters, keyed exactly like the harness config file.
/// Irrelevant fields keep the per-kind defaults from
/// default_detector_config().
struct DetectorConfig {
  std::string kind = "curie";  // ddm | eddm | adwin | ph | curie
  // ddm / eddm
  int min_num_instances = 30;
  double warning_level = 2.0;
  double out_control_level = 3.0;
  // adwin / ph
  double delta = 0.002;
  double threshold = 50.0;
  double alpha = 0.9999;
  int min_instances = 30;
  // curie
  int r = 2;
  int r_mut = 2;
  int mutation_period = 10;
  int num_mutants_neighbors = 2;
  int bins = 0;  // 0: use the stream's bins

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

DetectorConfig default_detector_config(const std::string& kind);

/// A stream for the harness: either a generator spec or a CSV file plus the
/// drift metadata needed for scoring.
struct StreamEntry {
  StreamSpec spec;
  std::string csv_path;  // empty: generate from spec

  bool from_csv() const { return !csv_path.empty(); }
  friend bool operator==(const StreamEntry&, const StreamEntry&) = default;
};

struct ExperimentConfig {
  int prep_size = 50;
  std::vector<std::uint64_t> seeds = {1};
  std::int64_t resource_sample_every = 2000;
  std::int64_t snapshot_every = 0;
  std::vector<LearnerConfig> learners;
  std::vector<DetectorConfig> detectors;
  std::vector<StreamEntry> streams;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
/// Parses and validates (referenced CSV files must exist).
ExperimentConfig load_config_file(const std::string& path);

/// The built-in experiment: NB and KNN learners, all five detectors with
/// their published configurations, and the 20-dataset synthetic suite.
ExperimentConfig paper_suite_config();

/// One row of the results CSV.
struct ResultRow {
  std::string scheme_id;
  std::string learner;
  std::string detector;
  std::string stream;
  std::uint64_t seed = 0;
  double pacc = 0.0;
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, mcc = 0.0, mu_d = 1000.0;
  double ram_hours = 0.0;
  double wall_seconds = 0.0;
};

ResultRow to_result_row(const RunResult& run);
void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_results_csv(const std::string& path);

struct RunFailure {
  std::string scheme_id;
  std::uint64_t seed = 0;
  std::string error;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<RunFailure> failures;
};

/// generate: one CSV per (stream spec, seed) plus manifest.json.
/// Returns the written dataset file names.
std::vector<std::string> cmd_generate(const ExperimentConfig& config,
                                      const std::string& out_dir);

/// run: execute learners x detectors x streams x seeds, write results.csv,
/// summary.json, nemenyi.csv (when rankable) and failures.json (when any
/// run failed). Returns 0 on full completion, 2 when runs failed.
int cmd_run(const ExperimentConfig& config, const std::string& out_dir,
            int parallel, ExperimentOutput* output = nullptr);

/// rank: recompute the per-metric mean scores, mean ranks and the Nemenyi
/// table from an existing results CSV.
int cmd_rank(const std::string& results_csv, const std::string& out_dir);

/// inspect: render a detector snapshot as per-dimension state maps with
/// mutation annotations.
int cmd_inspect(const std::string& snapshot_path, std::ostream& os);

}  // namespace curie
