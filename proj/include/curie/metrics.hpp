#pragma once

#include <cstdint>
#include <span>

#include "curie/streams.hpp"

namespace curie {

/// Running prequential accuracy since a reference step: the recursive update
/// pACC(t) = pACC(t-1) + (bit(t) - pACC(t-1)) / (t - t_ref + 1), which equals
/// the arithmetic mean of the correctness bits seen since t_ref.
class PrequentialTracker {
 public:
  void add(bool correct) {
    ++steps_;
    value_ += ((correct ? 1.0 : 0.0) - value_) / static_cast<double>(steps_);
  }
  double value() const { return value_; }
  std::int64_t steps() const { return steps_; }

 private:
  double value_ = 0.0;
  std::int64_t steps_ = 0;
};

/// Prequential accuracy of bits[t_ref..], via the recursion above.
double prequential_accuracy(std::span<const std::uint8_t> bits, std::size_t t_ref);

struct DetectionScore {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double mcc = 0.0;
  double mu_d = 1000.0;  // mean TP distance in steps; 1000 when there is no TP
  bool precision_defined = false;  // false when tp + fp == 0
  bool recall_defined = false;     // false when there are no true drifts
};

/// Score a detection sequence against the true drift positions.
///
/// A detection is a true positive when it is the first one to land inside
/// [drift, drift + w], where w is 2% of concept_size for abrupt drifts and
/// 10% for gradual ones. Later detections in the same window, and detections
/// outside every window, are false positives; unmatched drifts are false
/// negatives. Every evaluated step with no detection and outside all windows
/// counts as a true negative, which makes MCC well defined. Undefined
/// precision/recall are reported as 0 with the corresponding flag cleared;
/// MCC is 0 whenever a denominator factor vanishes.
DetectionScore score_detections(std::span<const std::int64_t> detections,
                                std::span<const std::int64_t> true_drifts,
                                DriftKind kind, std::int64_t concept_size,
                                std::int64_t evaluated_steps);

struct ResourceSample {
  double seconds = 0.0;
  double rss_gb = 0.0;
};

/// Time integral of sampled resident memory: GB held over hours of
/// processing, trapezoidal over the samples. Environment-dependent by
/// nature; reported, never asserted against.
double ram_hours(std::span<const ResourceSample> samples);

/// Resident set size of this process in GB (0.0 when unavailable).
double current_rss_gb();

}  // namespace curie
