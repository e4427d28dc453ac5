#include "curie/harness.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace curie {

double RunResult::pacc() const { return prequential_accuracy(correct, 0); }

DetectionScore RunResult::detection_score() const {
  return score_detections(detections, true_drifts, drift_kind, concept_size,
                          static_cast<std::int64_t>(correct.size()));
}

namespace {

void write_snapshot_file(const CurieDetector& detector, const RunConfig& config,
                         std::int64_t t, bool at_detection) {
  namespace fs = std::filesystem;
  fs::create_directories(config.snapshot_dir);
  std::string name = config.scheme_id + "_t" + std::to_string(t);
  if (at_detection) name += "_detection";
  const fs::path path = fs::path(config.snapshot_dir) / (name + ".txt");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write snapshot: " + path.string());
  detector.write_snapshot(os);
}

}  // namespace

RunResult run_scheme(Learner& learner, DetectorSlot& detector,
                     std::span<const Instance> stream, const StreamSpec& meta,
                     const RunConfig& config) {
  if ((detector.baseline == nullptr) == (detector.cellular == nullptr)) {
    throw std::invalid_argument("run_scheme: exactly one detector must be set");
  }
  const std::int64_t total = static_cast<std::int64_t>(stream.size());
  const std::int64_t P = config.prep_size;
  if (total <= P) throw std::invalid_argument("run_scheme: stream not longer than prep_size");
  const std::size_t dims = stream.front().x.size();
  for (const Instance& inst : stream) {
    if (inst.x.size() != dims)
      throw std::invalid_argument("run_scheme: inconsistent feature dimensionality");
  }

  RunResult result;
  result.seed = meta.seed;
  result.stream_name = meta.name;
  result.true_drifts = meta.positions;
  result.drift_kind = meta.drift;
  result.concept_size = concept_size(meta);
  result.correct.reserve(static_cast<std::size_t>(total - P));

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed_seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  const bool snapshots =
      detector.cellular && config.snapshot_every > 0 && !config.snapshot_dir.empty();

  // Preparatory process over the first P instances.
  if (detector.cellular) detector.cellular->prepare(stream.subspan(0, static_cast<std::size_t>(P)));
  std::deque<Instance> window(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(P));
  for (std::int64_t t = 0; t < P; ++t) learner.partial_fit(stream[static_cast<std::size_t>(t)].x, stream[static_cast<std::size_t>(t)].y);

  result.resources.push_back({elapsed_seconds(), current_rss_gb()});

  for (std::int64_t t = P; t < total; ++t) {
    const Instance& inst = stream[static_cast<std::size_t>(t)];
    window.push_back(inst);
    if (window.size() > static_cast<std::size_t>(P)) window.pop_front();

    const Label predicted = learner.predict(inst.x);
    const bool correct = predicted == inst.y;
    result.correct.push_back(correct ? 1 : 0);

    learner.partial_fit(inst.x, inst.y);

    bool changed = false;
    if (detector.cellular) {
      changed = detector.cellular->update(inst.x, inst.y) == Verdict::kDrift;
    } else {
      detector.baseline->add_element(correct ? kCorrectSignal : kErrorSignal);
      changed = detector.baseline->detected_change();
    }

    if (changed) {
      result.detections.push_back(t);
      // Re-initialize the detector and re-run the preparatory process over
      // the window. The cellular detector has already reseeded itself from
      // its own (identical) window inside update().
      if (detector.baseline) detector.baseline->reset();
      learner.reset();
      for (const Instance& w : window) learner.partial_fit(w.x, w.y);
    }

    if (config.resource_sample_every > 0 && (t - P + 1) % config.resource_sample_every == 0) {
      result.resources.push_back({elapsed_seconds(), current_rss_gb()});
    }
    if (snapshots && (changed || (t - P) % config.snapshot_every == 0)) {
      write_snapshot_file(*detector.cellular, config, t, changed);
    }
  }

  result.resources.push_back({elapsed_seconds(), current_rss_gb()});
  result.wall_seconds = elapsed_seconds();
  return result;
}

}  // namespace curie
