#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "curie/instance.hpp"

namespace curie {

/// Incremental classifier with predict-then-train support.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual void partial_fit(std::span<const double> x, Label y) = 0;
  virtual Label predict(std::span<const double> x) const = 0;
  /// Clear the model; hyper-parameters are kept. The caller re-trains from
  /// its window afterwards.
  virtual void reset() = 0;
};

/// Gaussian naive Bayes with numerically stable one-pass per-class
/// per-feature mean/variance updates. A small variance floor keeps constant
/// features from producing infinite densities.
class GaussianNb final : public Learner {
 public:
  void partial_fit(std::span<const double> x, Label y) override;
  Label predict(std::span<const double> x) const override;
  void reset() override;

  struct ClassStats {
    std::int64_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;
  };
  const std::map<Label, ClassStats>& classes() const { return classes_; }
  std::int64_t total_count() const { return total_; }

  static constexpr double kVarianceFloor = 1e-9;

 private:
  std::map<Label, ClassStats> classes_;
  std::int64_t total_ = 0;
  int dims_ = 0;
};

/// k-nearest-neighbors over a FIFO window of the last max_window_size
/// instances, Euclidean distance. Distance ties prefer the earlier window
/// element; vote ties pick the lowest class label.
class KnnClassifier final : public Learner {
 public:
  explicit KnnClassifier(int k = 5, int max_window_size = 50);

  void partial_fit(std::span<const double> x, Label y) override;
  Label predict(std::span<const double> x) const override;
  void reset() override;

  int k() const { return k_; }
  int max_window_size() const { return max_window_size_; }
  const std::deque<Instance>& window() const { return window_; }

 private:
  int k_;
  int max_window_size_;
  std::deque<Instance> window_;
};

}  // namespace curie
