#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "curie/verdict.hpp"

namespace curie {

/// Which binary wire value denotes a misclassification on a detector input.
/// The evaluation loop emits error_value on a wrong prediction and
/// 1 - error_value otherwise; binary-signal detectors translate their input
/// through this one shared convention.
struct SignalMapping {
  double error_value = 0.0;
  constexpr bool is_error(double v) const { return v == error_value; }
};

inline constexpr SignalMapping kDefaultSignal{};
inline constexpr double kErrorSignal = 0.0;
inline constexpr double kCorrectSignal = 1.0;

/// Uniform streaming interface shared by the comparison detectors.
class DriftDetector {
 public:
  virtual ~DriftDetector() = default;

  Verdict add_element(double value) {
    Verdict v = do_add(value);
    changed_ = (v == Verdict::kDrift);
    return v;
  }

  /// Edge-triggered: true iff the most recent add_element produced a drift
  /// verdict. Reading clears the flag; reset clears it too.
  bool detected_change() {
    bool c = changed_;
    changed_ = false;
    return c;
  }

  /// Restore the post-construction state. Configured parameters are kept.
  void reset() {
    changed_ = false;
    do_reset();
  }

 protected:
  virtual Verdict do_add(double value) = 0;
  virtual void do_reset() = 0;

 private:
  bool changed_ = false;
};

/// DDM: monitors the running misclassification probability p and its
/// binomial deviation s = sqrt(p(1-p)/n). Fires when p + s rises
/// out_control_level standard deviations above the historical minimum of
/// p + s; warns at warning_level deviations.
///
/// Input must be binary; which value means "error" comes from SignalMapping.
class Ddm final : public DriftDetector {
 public:
  explicit Ddm(int min_num_instances = 30, double warning_level = 2.0,
               double out_control_level = 3.0, SignalMapping signal = kDefaultSignal);

 protected:
  Verdict do_add(double value) override;
  void do_reset() override;

 private:
  int min_num_instances_;
  double warning_level_;
  double out_control_level_;
  SignalMapping signal_;

  std::int64_t n_ = 0;
  double p_ = 0.0;
  double s_ = 0.0;
  double p_min_ = std::numeric_limits<double>::infinity();
  double s_min_ = std::numeric_limits<double>::infinity();
  double ps_min_ = std::numeric_limits<double>::infinity();
};

/// EDDM: tracks the mean and deviation of the distance (in steps) between
/// consecutive misclassifications. Fires when (mean + 2*std) drops below
/// out_control_level times its historical maximum; warns below
/// warning_level. No verdict until two errors and min_num_instances have
/// been seen, since the distance statistics are undefined earlier.
class Eddm final : public DriftDetector {
 public:
  explicit Eddm(int min_num_instances = 30, double warning_level = 0.95,
                double out_control_level = 0.9, SignalMapping signal = kDefaultSignal);

 protected:
  Verdict do_add(double value) override;
  void do_reset() override;

 private:
  int min_num_instances_;
  double warning_level_;
  double out_control_level_;
  SignalMapping signal_;

  std::int64_t n_ = 0;
  std::int64_t error_count_ = 0;
  std::int64_t last_error_at_ = 0;
  double dist_mean_ = 0.0;
  double dist_m2_ = 0.0;
  double m2s_max_ = 0.0;
};

/// ADWIN: adaptive windowing over a real-valued stream, maintained as an
/// exponential histogram (at most max_buckets_per_row + 1 buckets of
/// capacity 2^row per row). After every element the window is scanned for a
/// split whose sub-window means differ beyond the delta-controlled cut
/// threshold; the stale head is dropped and a drift is reported.
class Adwin final : public DriftDetector {
 public:
  explicit Adwin(double delta = 0.002, int max_buckets_per_row = 5);

  std::int64_t width() const { return width_; }
  double total() const { return total_; }
  double mean() const { return width_ > 0 ? total_ / static_cast<double>(width_) : 0.0; }
  double variance() const;

  /// Bucket count per capacity level, oldest level last. For invariant
  /// checks and debugging.
  std::vector<int> bucket_counts_per_row() const;

 protected:
  Verdict do_add(double value) override;
  void do_reset() override;

 private:
  struct Bucket {
    double sum = 0.0;
    double var = 0.0;  // sum of squared deviations within the bucket
  };

  void insert(double value);
  void compress();
  void drop_oldest();
  bool check_cut();
  bool cut_expression(double n0, double n1, double u0, double u1) const;

  double delta_;
  int max_buckets_per_row_;

  std::vector<std::deque<Bucket>> rows_;  // rows_[i]: buckets of 2^i elements, front() oldest
  std::int64_t width_ = 0;
  double total_ = 0.0;
  double variance_sum_ = 0.0;  // sum of squared deviations over the window

  static constexpr int kMinSubWindow = 5;
  static constexpr int kMinWindowForCheck = 10;
};

/// Page-Hinkley: one-sided CUSUM-style test for an increase in the mean of
/// the input. Maintains m_t = alpha*m_{t-1} + (x_t - mean_t - delta) and its
/// running minimum M_t; fires when m_t - M_t exceeds the threshold.
class PageHinkley final : public DriftDetector {
 public:
  explicit PageHinkley(int min_instances = 30, double delta = 0.005,
                       double threshold = 50.0, double alpha = 0.9999);

 protected:
  Verdict do_add(double value) override;
  void do_reset() override;

 private:
  int min_instances_;
  double delta_;
  double threshold_;
  double alpha_;

  std::int64_t n_ = 0;
  double x_mean_ = 0.0;
  double m_ = 0.0;
  double m_min_ = std::numeric_limits<double>::infinity();
};

}  // namespace curie
