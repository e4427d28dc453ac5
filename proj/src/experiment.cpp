#include "curie/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace curie {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string display_name(const std::string& kind) {
  static const std::map<std::string, std::string> names = {
      {"ddm", "DDM"}, {"eddm", "EDDM"}, {"adwin", "ADWIN"}, {"ph", "PH"}, {"curie", "CURIE"}};
  auto it = names.find(kind);
  return it == names.end() ? kind : it->second;
}

// ---------------------------------------------------------------------------
// Config <-> JSON

json learner_to_json(const LearnerConfig& c) {
  json j{{"kind", c.kind}};
  if (c.kind == "knn") {
    j["k"] = c.k;
    j["max_window_size"] = c.max_window_size;
  }
  return j;
}

LearnerConfig learner_from_json(const json& j) {
  LearnerConfig c;
  c.kind = j.at("kind").get<std::string>();
  if (c.kind != "nb" && c.kind != "knn")
    throw ConfigError("unknown learner kind: " + c.kind);
  if (j.contains("k")) c.k = j.at("k").get<int>();
  if (j.contains("max_window_size")) c.max_window_size = j.at("max_window_size").get<int>();
  return c;
}

json detector_to_json(const DetectorConfig& c) {
  json j{{"kind", c.kind}};
  if (c.kind == "ddm" || c.kind == "eddm") {
    j["min_num_instances"] = c.min_num_instances;
    j["warning_level"] = c.warning_level;
    j["out_control_level"] = c.out_control_level;
  } else if (c.kind == "adwin") {
    j["delta"] = c.delta;
  } else if (c.kind == "ph") {
    j["min_instances"] = c.min_instances;
    j["delta"] = c.delta;
    j["threshold"] = c.threshold;
    j["alpha"] = c.alpha;
  } else if (c.kind == "curie") {
    j["r"] = c.r;
    j["r_mut"] = c.r_mut;
    j["mutation_period"] = c.mutation_period;
    j["num_mutants_neighbors"] = c.num_mutants_neighbors;
    j["bins"] = c.bins;
  }
  return j;
}

DetectorConfig detector_from_json(const json& j) {
  DetectorConfig c = default_detector_config(j.at("kind").get<std::string>());
  if (j.contains("min_num_instances")) c.min_num_instances = j.at("min_num_instances").get<int>();
  if (j.contains("warning_level")) c.warning_level = j.at("warning_level").get<double>();
  if (j.contains("out_control_level")) c.out_control_level = j.at("out_control_level").get<double>();
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("threshold")) c.threshold = j.at("threshold").get<double>();
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("min_instances")) c.min_instances = j.at("min_instances").get<int>();
  if (j.contains("r")) c.r = j.at("r").get<int>();
  if (j.contains("r_mut")) c.r_mut = j.at("r_mut").get<int>();
  if (j.contains("mutation_period")) c.mutation_period = j.at("mutation_period").get<int>();
  if (j.contains("num_mutants_neighbors"))
    c.num_mutants_neighbors = j.at("num_mutants_neighbors").get<int>();
  if (j.contains("bins")) c.bins = j.at("bins").get<int>();
  return c;
}

json functions_to_json(const std::vector<ConceptFunction>& schedule) {
  json arr = json::array();
  for (const auto& f : schedule) {
    switch (f.kind) {
      case GeneratorKind::kSine:
        arr.push_back(std::string("sine") + std::to_string(f.function_id) +
                      (f.reversed ? "_rev" : ""));
        break;
      case GeneratorKind::kRandomTree:
        arr.push_back(f.tree_seed);
        break;
      default:
        arr.push_back(f.function_id);
        break;
    }
  }
  return arr;
}

std::vector<ConceptFunction> functions_from_json(GeneratorKind kind, const json& arr) {
  std::vector<ConceptFunction> schedule;
  for (const auto& item : arr) {
    ConceptFunction f;
    f.kind = kind;
    if (kind == GeneratorKind::kSine) {
      const std::string s = item.get<std::string>();
      if (s == "sine1" || s == "sine1_rev") f.function_id = 1;
      else if (s == "sine2" || s == "sine2_rev") f.function_id = 2;
      else throw ConfigError("unknown sine function: " + s);
      f.reversed = s.ends_with("_rev");
    } else if (kind == GeneratorKind::kRandomTree) {
      f.function_id = 0;
      f.tree_seed = item.get<std::uint64_t>();
    } else {
      f.function_id = item.get<int>();
    }
    schedule.push_back(f);
  }
  return schedule;
}

json stream_to_json(const StreamEntry& e) {
  json j;
  j["name"] = e.spec.name;
  j["drift"] = to_string(e.spec.drift);
  j["positions"] = e.spec.positions;
  j["width"] = e.spec.width;
  j["bins"] = e.spec.bins;
  if (e.from_csv()) {
    j["csv"] = e.csv_path;
    j["concepts"] = e.spec.schedule.size();
  } else {
    j["generator"] = to_string(e.spec.schedule.front().kind);
    j["functions"] = functions_to_json(e.spec.schedule);
    j["length"] = e.spec.total_length;
    j["noise"] = e.spec.noise;
    j["seed"] = e.spec.seed;
  }
  return j;
}

StreamEntry stream_from_json(const json& j) {
  StreamEntry e;
  e.spec.name = j.at("name").get<std::string>();
  e.spec.drift = drift_kind_from_string(j.at("drift").get<std::string>());
  e.spec.positions = j.at("positions").get<std::vector<std::int64_t>>();
  if (j.contains("width")) e.spec.width = j.at("width").get<std::int64_t>();
  if (j.contains("bins")) e.spec.bins = j.at("bins").get<int>();
  if (j.contains("csv")) {
    e.csv_path = j.at("csv").get<std::string>();
    std::size_t concepts = e.spec.positions.size() + 1;
    if (j.contains("concepts")) concepts = j.at("concepts").get<std::size_t>();
    e.spec.schedule.assign(concepts, ConceptFunction{});
  } else {
    const GeneratorKind kind = generator_kind_from_string(j.at("generator").get<std::string>());
    e.spec.schedule = functions_from_json(kind, j.at("functions"));
    if (j.contains("length")) e.spec.total_length = j.at("length").get<std::int64_t>();
    if (j.contains("noise")) e.spec.noise = j.at("noise").get<double>();
    if (j.contains("seed")) e.spec.seed = j.at("seed").get<std::uint64_t>();
    validate_spec(e.spec);
  }
  return e;
}

}  // namespace

DetectorConfig default_detector_config(const std::string& kind) {
  DetectorConfig c;
  c.kind = kind;
  if (kind == "ddm") {
    c.min_num_instances = 30;
    c.warning_level = 2.0;
    c.out_control_level = 3.0;
  } else if (kind == "eddm") {
    c.min_num_instances = 30;
    c.warning_level = 0.95;
    c.out_control_level = 0.9;
  } else if (kind == "adwin") {
    c.delta = 0.002;
  } else if (kind == "ph") {
    c.min_instances = 30;
    c.delta = 0.005;
    c.threshold = 50.0;
    c.alpha = 0.9999;
  } else if (kind == "curie") {
    c.r = 2;
    c.r_mut = 2;
    c.mutation_period = 10;
    c.num_mutants_neighbors = 2;
    c.bins = 0;
  } else {
    throw ConfigError("unknown detector kind: " + kind);
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& config) {
  json j;
  j["prep_size"] = config.prep_size;
  j["seeds"] = config.seeds;
  j["resource_sample_every"] = config.resource_sample_every;
  j["snapshot_every"] = config.snapshot_every;
  j["learners"] = json::array();
  for (const auto& l : config.learners) j["learners"].push_back(learner_to_json(l));
  j["detectors"] = json::array();
  for (const auto& d : config.detectors) j["detectors"].push_back(detector_to_json(d));
  j["streams"] = json::array();
  for (const auto& s : config.streams) j["streams"].push_back(stream_to_json(s));
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    ExperimentConfig config;
    config.learners.clear();
    config.detectors.clear();
    if (j.contains("prep_size")) config.prep_size = j.at("prep_size").get<int>();
    if (j.contains("seeds")) config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("resource_sample_every"))
      config.resource_sample_every = j.at("resource_sample_every").get<std::int64_t>();
    if (j.contains("snapshot_every"))
      config.snapshot_every = j.at("snapshot_every").get<std::int64_t>();
    for (const auto& l : j.at("learners")) config.learners.push_back(learner_from_json(l));
    for (const auto& d : j.at("detectors")) config.detectors.push_back(detector_from_json(d));
    for (const auto& s : j.at("streams")) config.streams.push_back(stream_from_json(s));

    if (config.prep_size < 1) throw ConfigError("prep_size must be >= 1");
    if (config.seeds.empty()) throw ConfigError("at least one seed required");
    if (config.learners.empty()) throw ConfigError("at least one learner required");
    if (config.detectors.empty()) throw ConfigError("at least one detector required");
    if (config.streams.empty()) throw ConfigError("at least one stream required");
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  ExperimentConfig config = parse_config(buffer.str());
  for (const auto& s : config.streams) {
    if (s.from_csv() && !fs::exists(s.csv_path))
      throw ConfigError("referenced stream file does not exist: " + s.csv_path);
  }
  return config;
}

ExperimentConfig paper_suite_config() {
  ExperimentConfig config;
  config.prep_size = 50;
  config.seeds = {1};
  config.learners = {LearnerConfig{"nb", 5, 50}, LearnerConfig{"knn", 5, 50}};

  // Published configurations, including DDM's out_control_level of 300
  // (which in practice keeps DDM from ever firing; the library default for
  // standalone use is the conventional 3.0).
  DetectorConfig ddm = default_detector_config("ddm");
  ddm.out_control_level = 300.0;
  config.detectors = {ddm, default_detector_config("eddm"), default_detector_config("adwin"),
                      default_detector_config("ph"), default_detector_config("curie")};

  for (const StreamSpec& spec : paper_suite()) config.streams.push_back(StreamEntry{spec, ""});
  return config;
}

// ---------------------------------------------------------------------------
// Results CSV

ResultRow to_result_row(const RunResult& run) {
  ResultRow row;
  row.scheme_id = run.scheme_id;
  row.learner = run.learner_name;
  row.detector = run.detector_name;
  row.stream = run.stream_name;
  row.seed = run.seed;
  row.pacc = run.pacc();
  const DetectionScore score = run.detection_score();
  row.tp = score.tp;
  row.fp = score.fp;
  row.fn = score.fn;
  row.tn = score.tn;
  row.precision = score.precision;
  row.recall = score.recall;
  row.mcc = score.mcc;
  row.mu_d = score.mu_d;
  row.ram_hours = ram_hours(run.resources);
  row.wall_seconds = run.wall_seconds;
  return row;
}

static const char* kResultsHeader =
    "scheme_id,learner,detector,stream,seed,pacc,tp,fp,fn,tn,precision,recall,mcc,"
    "mu_d,ram_hours,wall_seconds";

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << kResultsHeader << "\n";
  for (const ResultRow& r : rows) {
    os << r.scheme_id << ',' << r.learner << ',' << r.detector << ',' << r.stream << ','
       << r.seed << ',' << fmt17(r.pacc) << ',' << r.tp << ',' << r.fp << ',' << r.fn << ','
       << r.tn << ',' << fmt17(r.precision) << ',' << fmt17(r.recall) << ',' << fmt17(r.mcc)
       << ',' << fmt17(r.mu_d) << ',' << fmt17(r.ram_hours) << ',' << fmt17(r.wall_seconds)
       << "\n";
  }
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != kResultsHeader)
    throw std::runtime_error(path + ": unexpected results header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 16)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 16 columns");
    ResultRow r;
    r.scheme_id = f[0];
    r.learner = f[1];
    r.detector = f[2];
    r.stream = f[3];
    r.seed = std::stoull(f[4]);
    r.pacc = std::stod(f[5]);
    r.tp = std::stoll(f[6]);
    r.fp = std::stoll(f[7]);
    r.fn = std::stoll(f[8]);
    r.tn = std::stoll(f[9]);
    r.precision = std::stod(f[10]);
    r.recall = std::stod(f[11]);
    r.mcc = std::stod(f[12]);
    r.mu_d = std::stod(f[13]);
    r.ram_hours = std::stod(f[14]);
    r.wall_seconds = std::stod(f[15]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// generate

std::vector<std::string> cmd_generate(const ExperimentConfig& config,
                                      const std::string& out_dir) {
  fs::create_directories(out_dir);
  json manifest;
  manifest["datasets"] = json::array();
  std::vector<std::string> files;

  for (const StreamEntry& entry : config.streams) {
    if (entry.from_csv()) continue;
    for (std::uint64_t seed : config.seeds) {
      StreamSpec realized = entry.spec;
      realized.seed = combine_seeds(entry.spec.seed, seed);
      const std::vector<Instance> instances = generate(realized);
      const std::string file = entry.spec.name + "_seed" + std::to_string(seed) + ".csv";
      export_csv(instances, (fs::path(out_dir) / file).string());
      files.push_back(file);

      json d = stream_to_json(entry);
      d["file"] = file;
      d["run_seed"] = seed;
      d["realized_seed"] = realized.seed;
      d["n_features"] = generator_features(entry.spec.schedule.front().kind);
      manifest["datasets"].push_back(std::move(d));
    }
  }
  std::ofstream os(fs::path(out_dir) / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + out_dir);
  os << manifest.dump(2) << "\n";
  return files;
}

// ---------------------------------------------------------------------------
// run

namespace {

std::unique_ptr<Learner> make_learner(const LearnerConfig& c) {
  if (c.kind == "nb") return std::make_unique<GaussianNb>();
  if (c.kind == "knn") return std::make_unique<KnnClassifier>(c.k, c.max_window_size);
  throw ConfigError("unknown learner kind: " + c.kind);
}

DetectorSlot make_detector(const DetectorConfig& c, const StreamSpec& stream, int dims,
                           int prep_size) {
  DetectorSlot slot;
  if (c.kind == "ddm") {
    slot.baseline = std::make_unique<Ddm>(c.min_num_instances, c.warning_level,
                                          c.out_control_level);
  } else if (c.kind == "eddm") {
    slot.baseline = std::make_unique<Eddm>(c.min_num_instances, c.warning_level,
                                           c.out_control_level);
  } else if (c.kind == "adwin") {
    slot.baseline = std::make_unique<Adwin>(c.delta);
  } else if (c.kind == "ph") {
    slot.baseline = std::make_unique<PageHinkley>(c.min_instances, c.delta, c.threshold,
                                                  c.alpha);
  } else if (c.kind == "curie") {
    CurieConfig cc;
    cc.grid.dims = dims;
    cc.grid.bins_per_dim = c.bins > 0 ? c.bins : stream.bins;
    cc.grid.radius = c.r;
    cc.grid.state_alphabet = {0, 1};
    cc.radius_mut = c.r_mut;
    cc.mutation_period = c.mutation_period;
    cc.n_muts_allowed = c.num_mutants_neighbors;
    cc.prep_size = prep_size;
    slot.cellular = std::make_unique<CurieDetector>(cc);
  } else {
    throw ConfigError("unknown detector kind: " + c.kind);
  }
  return slot;
}

struct MetricDef {
  const char* key;
  bool higher_is_better;
  double ResultRow::* field;
};

constexpr MetricDef kRankedMetrics[] = {
    {"pacc", true, &ResultRow::pacc},
    {"ram_hours", false, &ResultRow::ram_hours},
    {"mu_d", false, &ResultRow::mu_d},
    {"mcc", true, &ResultRow::mcc},
};

std::vector<std::string> ordered_unique(const std::vector<ResultRow>& rows,
                                        std::string ResultRow::* field) {
  std::vector<std::string> out;
  for (const ResultRow& r : rows) {
    if (std::find(out.begin(), out.end(), r.*field) == out.end()) out.push_back(r.*field);
  }
  return out;
}

void write_rank_outputs(const std::vector<ResultRow>& rows, const std::string& out_dir) {
  const std::vector<std::string> detectors = ordered_unique(rows, &ResultRow::detector);
  const std::vector<std::string> streams = ordered_unique(rows, &ResultRow::stream);
  const int k = static_cast<int>(detectors.size());
  const int n = static_cast<int>(streams.size());
  const bool rankable = k >= 2 && n >= 2;

  std::vector<std::string> names;
  for (const auto& d : detectors) names.push_back(display_name(d));

  json summary;
  summary["detectors"] = names;
  summary["n_datasets"] = n;
  json metrics = json::object();
  std::ofstream rank_csv;
  if (rankable) {
    rank_csv.open(fs::path(out_dir) / "nemenyi.csv");
    if (!rank_csv) throw std::runtime_error("cannot write nemenyi.csv in " + out_dir);
    rank_csv << "metric,detector,mean_score,mean_rank,critical_difference,"
                "friedman_chi2,iman_davenport_f,chi2_p_value,significant\n";
  }

  for (const MetricDef& metric : kRankedMetrics) {
    // Per (detector, stream): mean over learners and seeds.
    std::vector<std::vector<double>> matrix(
        static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    bool complete = true;
    for (int di = 0; di < k; ++di) {
      for (int si = 0; si < n; ++si) {
        double sum = 0.0;
        int count = 0;
        for (const ResultRow& r : rows) {
          if (r.detector == detectors[static_cast<std::size_t>(di)] &&
              r.stream == streams[static_cast<std::size_t>(si)]) {
            sum += r.*metric.field;
            ++count;
          }
        }
        if (count == 0) {
          complete = false;
        } else {
          matrix[static_cast<std::size_t>(di)][static_cast<std::size_t>(si)] =
              sum / count;
        }
      }
    }

    json m;
    m["higher_is_better"] = metric.higher_is_better;
    json mean_scores = json::object();
    for (int di = 0; di < k; ++di) {
      double sum = 0.0;
      for (double v : matrix[static_cast<std::size_t>(di)]) sum += v;
      mean_scores[names[static_cast<std::size_t>(di)]] = sum / std::max(1, n);
    }
    m["mean_score"] = mean_scores;

    if (rankable && complete) {
      const RankTable table = friedman_nemenyi(matrix, metric.higher_is_better, names);
      json mean_ranks = json::object();
      for (int di = 0; di < k; ++di)
        mean_ranks[names[static_cast<std::size_t>(di)]] =
            table.mean_ranks[static_cast<std::size_t>(di)];
      m["mean_rank"] = mean_ranks;
      m["friedman_chi2"] = table.friedman_chi2;
      m["iman_davenport_f"] = table.iman_davenport_f;
      m["chi2_p_value"] = table.chi2_p_value;
      m["significant"] = table.significant;
      summary["critical_difference"] = table.critical_difference;
      summary["alpha"] = table.alpha;
      for (int di = 0; di < k; ++di) {
        rank_csv << metric.key << ',' << names[static_cast<std::size_t>(di)] << ','
                 << fmt17(mean_scores[names[static_cast<std::size_t>(di)]].get<double>())
                 << ',' << fmt17(table.mean_ranks[static_cast<std::size_t>(di)]) << ','
                 << fmt17(table.critical_difference) << ',' << fmt17(table.friedman_chi2)
                 << ',' << fmt17(table.iman_davenport_f) << ','
                 << fmt17(table.chi2_p_value) << ',' << (table.significant ? 1 : 0)
                 << "\n";
      }
    }
    metrics[metric.key] = std::move(m);
  }
  summary["metrics"] = std::move(metrics);

  std::ofstream os(fs::path(out_dir) / "summary.json");
  if (!os) throw std::runtime_error("cannot write summary.json in " + out_dir);
  os << summary.dump(2) << "\n";
}

}  // namespace

int cmd_run(const ExperimentConfig& config, const std::string& out_dir, int parallel,
            ExperimentOutput* output) {
  fs::create_directories(out_dir);
  if (parallel < 1) parallel = 1;

  struct Scheme {
    std::size_t learner_idx;
    std::size_t detector_idx;
  };
  std::vector<Scheme> schemes;
  for (std::size_t li = 0; li < config.learners.size(); ++li)
    for (std::size_t di = 0; di < config.detectors.size(); ++di) schemes.push_back({li, di});

  std::vector<ResultRow> rows(config.streams.size() * config.seeds.size() * schemes.size());
  std::vector<RunFailure> failures;
  std::mutex failures_mutex;
  std::size_t row_base = 0;

  for (const StreamEntry& entry : config.streams) {
    std::vector<Instance> csv_instances;
    if (entry.from_csv()) csv_instances = import_csv(entry.csv_path);

    for (std::uint64_t seed : config.seeds) {
      std::vector<Instance> generated;
      const std::vector<Instance>* instances = &csv_instances;
      StreamSpec meta = entry.spec;
      if (!entry.from_csv()) {
        StreamSpec realized = entry.spec;
        realized.seed = combine_seeds(entry.spec.seed, seed);
        generated = generate(realized);
        instances = &generated;
      } else {
        meta.total_length = static_cast<std::int64_t>(csv_instances.size());
      }
      meta.seed = seed;

      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= schemes.size()) break;
          const LearnerConfig& lc = config.learners[schemes[i].learner_idx];
          const DetectorConfig& dc = config.detectors[schemes[i].detector_idx];
          const std::string scheme_id =
              lc.kind + "-" + dc.kind + "-" + meta.name + "-s" + std::to_string(seed);
          try {
            auto learner = make_learner(lc);
            DetectorSlot slot = make_detector(
                dc, meta, static_cast<int>(instances->front().x.size()), config.prep_size);
            RunConfig rc;
            rc.prep_size = config.prep_size;
            rc.resource_sample_every = config.resource_sample_every;
            rc.snapshot_every = config.snapshot_every;
            rc.snapshot_dir = (fs::path(out_dir) / "snapshots").string();
            rc.scheme_id = scheme_id;
            RunResult run = run_scheme(*learner, slot, *instances, meta, rc);
            run.scheme_id = lc.kind + "-" + dc.kind + "-" + meta.name;
            run.learner_name = lc.kind;
            run.detector_name = dc.kind;
            rows[row_base + i] = to_result_row(run);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failures_mutex);
            failures.push_back({scheme_id, seed, e.what()});
          }
        }
      };
      std::vector<std::thread> pool;
      const int threads = std::min<int>(parallel, static_cast<int>(schemes.size()));
      for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
      worker();
      for (auto& th : pool) th.join();

      row_base += schemes.size();
    }
  }

  // Drop rows of failed runs (they were left default-constructed).
  if (!failures.empty()) {
    std::vector<ResultRow> kept;
    for (ResultRow& r : rows) {
      if (!r.scheme_id.empty()) kept.push_back(std::move(r));
    }
    rows = std::move(kept);
  }

  write_results_csv(rows, (fs::path(out_dir) / "results.csv").string());
  if (failures.empty()) {
    write_rank_outputs(rows, out_dir);
  } else {
    json items = json::array();
    for (const RunFailure& f : failures) {
      items.push_back({{"scheme_id", f.scheme_id}, {"seed", f.seed}, {"error", f.error}});
    }
    std::ofstream os(fs::path(out_dir) / "failures.json");
    os << items.dump(2) << "\n";
  }

  if (output) {
    output->rows = rows;
    output->failures = failures;
  }
  return failures.empty() ? 0 : 2;
}

int cmd_rank(const std::string& results_csv, const std::string& out_dir) {
  const std::vector<ResultRow> rows = read_results_csv(results_csv);
  if (rows.empty()) throw std::runtime_error(results_csv + ": no result rows");
  fs::create_directories(out_dir);
  write_rank_outputs(rows, out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// inspect

namespace {

struct SnapshotData {
  std::int64_t clock = 0;
  int r_mut = 0, mutation_period = 0, n_muts_allowed = 0, prep_size = 0;
  int dims = 0, bins = 0, radius = 0;
  std::vector<std::pair<double, double>> limits;
  struct SnapCell {
    std::string state = "-";
    std::int64_t hits = 0;
    std::int64_t last_mutation = -1;
  };
  std::vector<SnapCell> cells;  // row-major
  std::vector<std::pair<std::vector<int>, std::vector<std::int64_t>>> mutation_logs;
  bool has_detection = false;
  std::int64_t detection_time = 0;
  std::vector<int> detection_cell;
  std::vector<std::vector<int>> detection_neighbors;

  int index_of(const std::vector<int>& coords) const {
    int idx = 0;
    for (int c : coords) idx = idx * bins + c;
    return idx;
  }
};

[[noreturn]] void snap_error(const std::string& origin, std::size_t line_no,
                             const std::string& message) {
  throw std::runtime_error(origin + ": line " + std::to_string(line_no) + ": " + message);
}

std::vector<int> parse_coords(const std::string& token, int dims,
                              const std::string& origin, std::size_t line_no) {
  std::vector<int> coords;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = token.find(',', start);
    try {
      coords.push_back(std::stoi(token.substr(start, comma - start)));
    } catch (...) {
      snap_error(origin, line_no, "bad coordinate tuple '" + token + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (dims > 0 && static_cast<int>(coords.size()) != dims)
    snap_error(origin, line_no, "coordinate tuple has wrong arity: '" + token + "'");
  return coords;
}

int parse_kv(const std::string& token, const char* key, const std::string& origin,
             std::size_t line_no) {
  const std::string prefix = std::string(key) + "=";
  if (!token.starts_with(prefix)) snap_error(origin, line_no, "expected " + prefix + "...");
  try {
    return std::stoi(token.substr(prefix.size()));
  } catch (...) {
    snap_error(origin, line_no, "bad value in '" + token + "'");
  }
}

SnapshotData parse_snapshot(std::istream& is, const std::string& origin) {
  SnapshotData snap;
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line() || line != "curie-snapshot v1")
    snap_error(origin, line_no, "not a curie snapshot (missing 'curie-snapshot v1')");

  bool saw_end = false;
  while (next_line()) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "clock") {
      if (!(ls >> snap.clock)) snap_error(origin, line_no, "bad clock line");
    } else if (tag == "params") {
      std::string t1, t2, t3, t4;
      if (!(ls >> t1 >> t2 >> t3 >> t4)) snap_error(origin, line_no, "bad params line");
      snap.r_mut = parse_kv(t1, "r_mut", origin, line_no);
      snap.mutation_period = parse_kv(t2, "mutation_period", origin, line_no);
      snap.n_muts_allowed = parse_kv(t3, "n_muts_allowed", origin, line_no);
      snap.prep_size = parse_kv(t4, "P", origin, line_no);
    } else if (tag == "alphabet") {
      // informational
    } else if (tag == "grid") {
      std::string t1, t2, t3, t4;
      if (!(ls >> t1 >> t2 >> t3 >> t4)) snap_error(origin, line_no, "bad grid line");
      snap.dims = parse_kv(t1, "d", origin, line_no);
      snap.bins = parse_kv(t2, "G", origin, line_no);
      snap.radius = parse_kv(t3, "r", origin, line_no);
      const int cells = parse_kv(t4, "cells", origin, line_no);
      snap.cells.assign(static_cast<std::size_t>(cells), {});
      snap.limits.assign(static_cast<std::size_t>(snap.dims), {0.0, 0.0});
    } else if (tag == "limits") {
      int dim;
      double lo, hi;
      if (!(ls >> dim >> lo >> hi) || dim < 0 || dim >= snap.dims)
        snap_error(origin, line_no, "bad limits line");
      snap.limits[static_cast<std::size_t>(dim)] = {lo, hi};
    } else if (tag == "cell") {
      std::string coords_token, state, last;
      std::int64_t hits;
      if (!(ls >> coords_token >> state >> hits >> last))
        snap_error(origin, line_no, "bad cell line");
      const auto coords = parse_coords(coords_token, snap.dims, origin, line_no);
      const int idx = snap.index_of(coords);
      if (idx < 0 || idx >= static_cast<int>(snap.cells.size()))
        snap_error(origin, line_no, "cell coordinates out of range");
      auto& cell = snap.cells[static_cast<std::size_t>(idx)];
      cell.state = state;
      cell.hits = hits;
      cell.last_mutation = last == "-" ? -1 : std::stoll(last);
    } else if (tag == "mutlog") {
      std::string coords_token;
      if (!(ls >> coords_token)) snap_error(origin, line_no, "bad mutlog line");
      const auto coords = parse_coords(coords_token, snap.dims, origin, line_no);
      std::vector<std::int64_t> times;
      std::int64_t t;
      while (ls >> t) times.push_back(t);
      snap.mutation_logs.emplace_back(coords, std::move(times));
    } else if (tag == "detection") {
      std::string coords_token;
      if (!(ls >> snap.detection_time >> coords_token))
        snap_error(origin, line_no, "bad detection line");
      snap.detection_cell = parse_coords(coords_token, snap.dims, origin, line_no);
      std::string nb;
      while (ls >> nb) snap.detection_neighbors.push_back(parse_coords(nb, snap.dims, origin, line_no));
      snap.has_detection = true;
    } else if (tag == "end") {
      saw_end = true;
      break;
    } else {
      snap_error(origin, line_no, "unknown record '" + tag + "'");
    }
  }
  if (!saw_end) snap_error(origin, line_no, "truncated snapshot (missing 'end')");
  if (snap.dims == 0 || snap.cells.empty()) snap_error(origin, line_no, "snapshot has no grid");
  return snap;
}

void render_snapshot(const SnapshotData& snap, std::ostream& os) {
  os << "detector snapshot at clock " << snap.clock << "\n";
  os << "grid: d=" << snap.dims << " G=" << snap.bins << " r=" << snap.radius
     << " r_mut=" << snap.r_mut << " mutation_period=" << snap.mutation_period
     << " n_muts_allowed=" << snap.n_muts_allowed << " P=" << snap.prep_size << "\n";
  for (int n = 0; n < snap.dims; ++n) {
    os << "dim " << n << ": [" << fmt17(snap.limits[static_cast<std::size_t>(n)].first)
       << ", " << fmt17(snap.limits[static_cast<std::size_t>(n)].second) << "]\n";
  }

  const auto mark = [&](const std::vector<int>& coords) -> const char* {
    if (!snap.has_detection) return "";
    if (coords == snap.detection_cell) return "*";
    for (const auto& nb : snap.detection_neighbors) {
      if (coords == nb) return "+";
    }
    return "";
  };

  // State maps: rows over dim 0, columns over dim 1 (or a single row for
  // d=1), one slice per combination of the remaining dimensions.
  const int rows = snap.bins;
  const int cols = snap.dims >= 2 ? snap.bins : 1;
  std::int64_t slices = 1;
  for (int n = 2; n < snap.dims; ++n) slices *= snap.bins;

  for (std::int64_t s = 0; s < slices; ++s) {
    std::vector<int> tail;
    std::int64_t rem = s;
    for (int n = snap.dims - 1; n >= 2; --n) {
      tail.insert(tail.begin(), static_cast<int>(rem % snap.bins));
      rem /= snap.bins;
    }
    os << "\nstate map";
    if (snap.dims > 2) {
      os << " [*,*";
      for (int c : tail) os << ',' << c;
      os << ']';
    }
    os << " (rows: dim 0, cols: dim 1):\n";
    std::vector<int> coords(static_cast<std::size_t>(snap.dims), 0);
    for (std::size_t i = 0; i < tail.size(); ++i) coords[i + 2] = tail[i];
    for (int r = 0; r < rows; ++r) {
      coords[0] = r;
      for (int c = 0; c < cols; ++c) {
        if (snap.dims >= 2) coords[1] = c;
        const auto& cell = snap.cells[static_cast<std::size_t>(snap.index_of(coords))];
        os << (c ? " " : "") << cell.state << mark(coords);
      }
      os << "\n";
    }
  }

  // Mutations within the last mutation_period steps.
  struct Recent {
    std::int64_t time;
    std::vector<int> coords;
  };
  std::vector<Recent> recent;
  std::size_t log_cells = 0;
  std::size_t log_events = 0;
  for (const auto& [coords, times] : snap.mutation_logs) {
    ++log_cells;
    log_events += times.size();
    for (std::int64_t t : times) {
      if (t > snap.clock - snap.mutation_period) recent.push_back({t, coords});
    }
  }
  std::sort(recent.begin(), recent.end(),
            [](const Recent& a, const Recent& b) { return a.time > b.time; });

  os << "\nrecent mutations (last " << snap.mutation_period << " steps):\n";
  if (recent.empty()) {
    os << "  no recent mutations\n";
  } else {
    for (const Recent& r : recent) {
      os << "  t=" << r.time << " cell [";
      for (std::size_t i = 0; i < r.coords.size(); ++i) os << (i ? "," : "") << r.coords[i];
      os << "]\n";
    }
  }
  os << "mutation log: " << log_cells << " cells, " << log_events << " events\n";

  if (snap.has_detection) {
    os << "detection at t=" << snap.detection_time << ": cell [";
    for (std::size_t i = 0; i < snap.detection_cell.size(); ++i)
      os << (i ? "," : "") << snap.detection_cell[i];
    os << "] (*), counted mutant neighbors (+):";
    for (const auto& nb : snap.detection_neighbors) {
      os << " [";
      for (std::size_t i = 0; i < nb.size(); ++i) os << (i ? "," : "") << nb[i];
      os << "]";
    }
    os << "\n";
  }
}

}  // namespace

int cmd_inspect(const std::string& snapshot_path, std::ostream& os) {
  std::ifstream is(snapshot_path);
  if (!is) throw std::runtime_error("cannot open: " + snapshot_path);
  const SnapshotData snap = parse_snapshot(is, snapshot_path);
  render_snapshot(snap, os);
  return 0;
}

}  // namespace curie
