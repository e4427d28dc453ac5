#include "curie/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include <unistd.h>

namespace curie {

double prequential_accuracy(std::span<const std::uint8_t> bits, std::size_t t_ref) {
  if (bits.empty()) throw std::invalid_argument("prequential_accuracy: no bits");
  if (t_ref >= bits.size())
    throw std::invalid_argument("prequential_accuracy: reference time beyond range");
  PrequentialTracker tracker;
  for (std::size_t i = t_ref; i < bits.size(); ++i) tracker.add(bits[i] != 0);
  return tracker.value();
}

DetectionScore score_detections(std::span<const std::int64_t> detections,
                                std::span<const std::int64_t> true_drifts,
                                DriftKind kind, std::int64_t concept_size,
                                std::int64_t evaluated_steps) {
  const double fraction = kind == DriftKind::kAbrupt ? 0.02 : 0.10;
  const std::int64_t window =
      static_cast<std::int64_t>(std::llround(static_cast<double>(concept_size) * fraction));

  DetectionScore score;
  std::vector<bool> matched(true_drifts.size(), false);
  double distance_sum = 0.0;

  for (std::int64_t det : detections) {
    bool is_tp = false;
    for (std::size_t j = 0; j < true_drifts.size(); ++j) {
      if (det >= true_drifts[j] && det <= true_drifts[j] + window) {
        if (!matched[j]) {
          matched[j] = true;
          is_tp = true;
          distance_sum += static_cast<double>(det - true_drifts[j]);
        }
        break;  // windows never overlap: one real drift per window
      }
    }
    if (is_tp) {
      ++score.tp;
    } else {
      ++score.fp;
    }
  }
  for (bool m : matched) {
    if (!m) ++score.fn;
  }
  score.tn = evaluated_steps - score.tp - score.fp - score.fn;

  score.mu_d = score.tp > 0 ? distance_sum / static_cast<double>(score.tp) : 1000.0;

  if (score.tp + score.fp > 0) {
    score.precision = static_cast<double>(score.tp) / static_cast<double>(score.tp + score.fp);
    score.precision_defined = true;
  }
  if (!true_drifts.empty()) {
    score.recall = static_cast<double>(score.tp) / static_cast<double>(true_drifts.size());
    score.recall_defined = true;
  }

  const double f1 = static_cast<double>(score.tp + score.fp);
  const double f2 = static_cast<double>(score.tp + score.fn);
  const double f3 = static_cast<double>(score.tn + score.fp);
  const double f4 = static_cast<double>(score.tn + score.fn);
  if (f1 > 0 && f2 > 0 && f3 > 0 && f4 > 0) {
    const double num = static_cast<double>(score.tp) * static_cast<double>(score.tn) -
                       static_cast<double>(score.fp) * static_cast<double>(score.fn);
    score.mcc = num / (std::sqrt(f1) * std::sqrt(f2) * std::sqrt(f3) * std::sqrt(f4));
  }
  return score;
}

double ram_hours(std::span<const ResourceSample> samples) {
  if (samples.empty()) {
    std::fprintf(stderr, "warning: ram_hours requested with no resource samples\n");
    return 0.0;
  }
  double gb_seconds = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].seconds - samples[i - 1].seconds;
    gb_seconds += 0.5 * (samples[i].rss_gb + samples[i - 1].rss_gb) * dt;
  }
  return gb_seconds / 3600.0;
}

double current_rss_gb() {
  std::FILE* f = std::fopen("/proc/self/statm", "r");
  if (!f) return 0.0;
  long total_pages = 0;
  long resident_pages = 0;
  const int got = std::fscanf(f, "%ld %ld", &total_pages, &resident_pages);
  std::fclose(f);
  if (got != 2) return 0.0;
  const double page = static_cast<double>(sysconf(_SC_PAGESIZE));
  return static_cast<double>(resident_pages) * page / (1024.0 * 1024.0 * 1024.0);
}

}  // namespace curie
