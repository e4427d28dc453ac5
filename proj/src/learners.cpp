#include "curie/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace curie {

namespace {

void check_features(std::span<const double> x, int dims) {
  if (dims != 0 && static_cast<int>(x.size()) != dims) {
    throw std::invalid_argument("learner: feature dimensionality changed mid-run");
  }
  for (double v : x) {
    if (std::isnan(v)) throw std::invalid_argument("learner: NaN feature");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// GaussianNb

void GaussianNb::partial_fit(std::span<const double> x, Label y) {
  check_features(x, dims_);
  if (dims_ == 0) dims_ = static_cast<int>(x.size());

  ClassStats& stats = classes_[y];
  if (stats.count == 0) {
    stats.mean.assign(x.size(), 0.0);
    stats.m2.assign(x.size(), 0.0);
  }
  ++stats.count;
  ++total_;
  for (std::size_t f = 0; f < x.size(); ++f) {
    const double delta = x[f] - stats.mean[f];
    stats.mean[f] += delta / static_cast<double>(stats.count);
    stats.m2[f] += delta * (x[f] - stats.mean[f]);
  }
}

Label GaussianNb::predict(std::span<const double> x) const {
  if (total_ == 0) throw std::logic_error("naive bayes: predict on empty model");
  check_features(x, dims_);

  double best_score = -std::numeric_limits<double>::infinity();
  Label best = classes_.begin()->first;
  for (const auto& [label, stats] : classes_) {
    if (stats.count == 0) continue;
    double score = std::log(static_cast<double>(stats.count) / static_cast<double>(total_));
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double var = stats.m2[f] / static_cast<double>(stats.count) + kVarianceFloor;
      const double diff = x[f] - stats.mean[f];
      score += -0.5 * std::log(2.0 * std::numbers::pi * var) - diff * diff / (2.0 * var);
    }
    if (score > best_score) {
      best_score = score;
      best = label;
    }
  }
  return best;
}

void GaussianNb::reset() {
  classes_.clear();
  total_ = 0;
  dims_ = 0;
}

// ---------------------------------------------------------------------------
// KnnClassifier

KnnClassifier::KnnClassifier(int k, int max_window_size)
    : k_(k), max_window_size_(max_window_size) {
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (max_window_size < 1) throw std::invalid_argument("knn: max_window_size must be >= 1");
}

void KnnClassifier::partial_fit(std::span<const double> x, Label y) {
  check_features(x, window_.empty() ? 0 : static_cast<int>(window_.front().x.size()));
  window_.push_back(Instance{std::vector<double>(x.begin(), x.end()), y});
  if (static_cast<int>(window_.size()) > max_window_size_) window_.pop_front();
}

Label KnnClassifier::predict(std::span<const double> x) const {
  if (window_.empty()) throw std::logic_error("knn: predict on empty window");
  check_features(x, static_cast<int>(window_.front().x.size()));

  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(window_.size());
  for (std::size_t i = 0; i < window_.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double diff = x[f] - window_[i].x[f];
      d2 += diff * diff;
    }
    by_distance.emplace_back(d2, i);
  }
  // Stable sort keeps earlier window elements first among equal distances.
  std::stable_sort(by_distance.begin(), by_distance.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k_), window_.size());
  std::map<Label, int> votes;
  for (std::size_t i = 0; i < take; ++i) ++votes[window_[by_distance[i].second].y];

  Label best = votes.begin()->first;
  int best_votes = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_votes) {  // map order makes the lowest label win ties
      best_votes = count;
      best = label;
    }
  }
  return best;
}

void KnnClassifier::reset() { window_.clear(); }

}  // namespace curie
