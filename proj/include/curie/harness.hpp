#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "curie/curie_detector.hpp"
#include "curie/detectors.hpp"
#include "curie/learners.hpp"
#include "curie/metrics.hpp"
#include "curie/streams.hpp"

namespace curie {

/// Exactly one of the two members is set: the loop trains a cellular
/// detector directly on (x, y) and feeds every other detector the binary
/// correctness signal of the base learner.
struct DetectorSlot {
  std::unique_ptr<DriftDetector> baseline;
  std::unique_ptr<CurieDetector> cellular;
};

struct RunConfig {
  int prep_size = 50;
  std::int64_t resource_sample_every = 2000;  // steps between RSS samples
  std::int64_t snapshot_every = 0;            // 0 = off; cellular detector only
  std::string snapshot_dir;
  std::string scheme_id;  // used in snapshot file names
};

/// Full trace of one learner x detector x stream run.
struct RunResult {
  std::string scheme_id;
  std::string learner_name;
  std::string detector_name;
  std::string stream_name;
  std::uint64_t seed = 0;

  std::vector<std::uint8_t> correct;       // one bit per evaluated step (t >= P)
  std::vector<std::int64_t> detections;    // absolute step indices
  std::vector<std::int64_t> true_drifts;
  DriftKind drift_kind = DriftKind::kAbrupt;
  std::int64_t concept_size = 10000;

  std::vector<ResourceSample> resources;
  double wall_seconds = 0.0;

  double pacc() const;  // prequential accuracy with t_ref = P
  DetectionScore detection_score() const;
};

/// Prequential learning-detection loop. The first P instances prepare the
/// learner (and the cellular detector, when present) and prime the sliding
/// window; from then on each instance is predicted on, used for training,
/// and fed to the detector. On a detected change the baseline detector is
/// re-initialized and the learner is re-prepared from the window. The
/// cellular detector reseeds itself internally as part of its update.
RunResult run_scheme(Learner& learner, DetectorSlot& detector,
                     std::span<const Instance> stream, const StreamSpec& meta,
                     const RunConfig& config);

}  // namespace curie
