#include "curie/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curie {

namespace {

double require_binary(double value) {
  if (value != 0.0 && value != 1.0) {
    throw std::invalid_argument("detector: binary signal expected (0 or 1)");
  }
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// DDM

Ddm::Ddm(int min_num_instances, double warning_level, double out_control_level,
         SignalMapping signal)
    : min_num_instances_(min_num_instances),
      warning_level_(warning_level),
      out_control_level_(out_control_level),
      signal_(signal) {}

Verdict Ddm::do_add(double value) {
  const double e = signal_.is_error(require_binary(value)) ? 1.0 : 0.0;
  ++n_;
  p_ += (e - p_) / static_cast<double>(n_);
  s_ = std::sqrt(p_ * (1.0 - p_) / static_cast<double>(n_));

  if (n_ < min_num_instances_) return Verdict::kNoChange;

  if (p_ + s_ <= ps_min_) {
    p_min_ = p_;
    s_min_ = s_;
    ps_min_ = p_ + s_;
  }
  // Strict comparison: with zero observed errors p = s = 0 and the minima
  // collapse to 0, where >= would fire unconditionally.
  if (p_ + s_ > p_min_ + out_control_level_ * s_min_) return Verdict::kDrift;
  if (p_ + s_ > p_min_ + warning_level_ * s_min_) return Verdict::kWarning;
  return Verdict::kNoChange;
}

void Ddm::do_reset() {
  n_ = 0;
  p_ = s_ = 0.0;
  p_min_ = s_min_ = ps_min_ = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// EDDM

Eddm::Eddm(int min_num_instances, double warning_level, double out_control_level,
           SignalMapping signal)
    : min_num_instances_(min_num_instances),
      warning_level_(warning_level),
      out_control_level_(out_control_level),
      signal_(signal) {}

Verdict Eddm::do_add(double value) {
  const bool error = signal_.is_error(require_binary(value));
  ++n_;
  if (!error) return Verdict::kNoChange;

  ++error_count_;
  if (error_count_ == 1) {
    last_error_at_ = n_;
    return Verdict::kNoChange;
  }

  const double distance = static_cast<double>(n_ - last_error_at_);
  last_error_at_ = n_;
  const double k = static_cast<double>(error_count_ - 1);
  const double delta = distance - dist_mean_;
  dist_mean_ += delta / k;
  dist_m2_ += delta * (distance - dist_mean_);
  const double dist_std = std::sqrt(dist_m2_ / k);

  const double m2s = dist_mean_ + 2.0 * dist_std;
  if (m2s > m2s_max_) m2s_max_ = m2s;

  if (n_ < min_num_instances_ || m2s_max_ <= 0.0) return Verdict::kNoChange;

  const double ratio = m2s / m2s_max_;
  if (ratio < out_control_level_) return Verdict::kDrift;
  if (ratio < warning_level_) return Verdict::kWarning;
  return Verdict::kNoChange;
}

void Eddm::do_reset() {
  n_ = 0;
  error_count_ = 0;
  last_error_at_ = 0;
  dist_mean_ = dist_m2_ = 0.0;
  m2s_max_ = 0.0;
}

// ---------------------------------------------------------------------------
// ADWIN

Adwin::Adwin(double delta, int max_buckets_per_row)
    : delta_(delta), max_buckets_per_row_(max_buckets_per_row) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("adwin: delta in (0,1)");
  rows_.emplace_back();
}

double Adwin::variance() const {
  return width_ > 0 ? std::max(0.0, variance_sum_) / static_cast<double>(width_) : 0.0;
}

std::vector<int> Adwin::bucket_counts_per_row() const {
  std::vector<int> counts;
  counts.reserve(rows_.size());
  for (const auto& row : rows_) counts.push_back(static_cast<int>(row.size()));
  return counts;
}

void Adwin::insert(double value) {
  rows_[0].push_back(Bucket{value, 0.0});
  ++width_;
  if (width_ > 1) {
    const double prev_mean = total_ / static_cast<double>(width_ - 1);
    variance_sum_ += static_cast<double>(width_ - 1) * (value - prev_mean) *
                     (value - prev_mean) / static_cast<double>(width_);
  }
  total_ += value;
  compress();
}

void Adwin::compress() {
  for (std::size_t row = 0; row < rows_.size(); ++row) {
    if (static_cast<int>(rows_[row].size()) <= max_buckets_per_row_ + 1) continue;
    if (row + 1 == rows_.size()) rows_.emplace_back();
    // Merge the two oldest buckets of this row into the youngest bucket of
    // the next row.
    Bucket a = rows_[row].front();
    rows_[row].pop_front();
    Bucket b = rows_[row].front();
    rows_[row].pop_front();
    const double n = static_cast<double>(std::int64_t{1} << row);
    const double ua = a.sum / n;
    const double ub = b.sum / n;
    Bucket merged;
    merged.sum = a.sum + b.sum;
    merged.var = a.var + b.var + (n / 2.0) * (ua - ub) * (ua - ub);
    rows_[row + 1].push_back(merged);
  }
}

void Adwin::drop_oldest() {
  std::size_t row = rows_.size();
  while (row > 0 && rows_[row - 1].empty()) --row;
  if (row == 0) return;
  --row;
  const Bucket bucket = rows_[row].front();
  rows_[row].pop_front();
  const double n = static_cast<double>(std::int64_t{1} << row);
  width_ -= std::int64_t{1} << row;
  total_ -= bucket.sum;
  if (width_ > 0) {
    const double u = bucket.sum / n;
    const double rest_mean = total_ / static_cast<double>(width_);
    variance_sum_ -= bucket.var + n * static_cast<double>(width_) /
                                      (n + static_cast<double>(width_)) *
                                      (u - rest_mean) * (u - rest_mean);
    variance_sum_ = std::max(0.0, variance_sum_);
  } else {
    variance_sum_ = 0.0;
  }
  while (rows_.size() > 1 && rows_.back().empty()) rows_.pop_back();
}

bool Adwin::cut_expression(double n0, double n1, double u0, double u1) const {
  const double v = variance();
  const double dd = std::log(2.0 * std::log(static_cast<double>(width_)) / delta_);
  const double m =
      1.0 / (n0 - kMinSubWindow + 1.0) + 1.0 / (n1 - kMinSubWindow + 1.0);
  const double eps = std::sqrt(2.0 * m * v * dd) + (2.0 / 3.0) * dd * m;
  return std::abs(u0 - u1) > eps;
}

bool Adwin::check_cut() {
  bool change = false;
  bool reduced = true;
  while (reduced && width_ >= kMinWindowForCheck) {
    reduced = false;
    double n0 = 0.0;
    double sum0 = 0.0;
    // Scan prefix splits from the oldest bucket toward the newest.
    for (std::size_t r = rows_.size(); r-- > 0 && !reduced;) {
      const double bucket_n = static_cast<double>(std::int64_t{1} << r);
      for (const Bucket& b : rows_[r]) {
        n0 += bucket_n;
        sum0 += b.sum;
        const double n1 = static_cast<double>(width_) - n0;
        const double sum1 = total_ - sum0;
        if (n0 >= kMinSubWindow && n1 >= kMinSubWindow &&
            cut_expression(n0, n1, sum0 / n0, sum1 / n1)) {
          change = true;
          drop_oldest();
          reduced = true;  // restart the scan over the shrunk window
          break;
        }
      }
    }
  }
  return change;
}

Verdict Adwin::do_add(double value) {
  insert(value);
  return check_cut() ? Verdict::kDrift : Verdict::kNoChange;
}

void Adwin::do_reset() {
  rows_.clear();
  rows_.emplace_back();
  width_ = 0;
  total_ = 0.0;
  variance_sum_ = 0.0;
}

// ---------------------------------------------------------------------------
// Page-Hinkley

PageHinkley::PageHinkley(int min_instances, double delta, double threshold, double alpha)
    : min_instances_(min_instances), delta_(delta), threshold_(threshold), alpha_(alpha) {}

Verdict PageHinkley::do_add(double value) {
  ++n_;
  x_mean_ += (value - x_mean_) / static_cast<double>(n_);
  m_ = alpha_ * m_ + (value - x_mean_ - delta_);
  m_min_ = std::min(m_min_, m_);

  if (n_ < min_instances_) return Verdict::kNoChange;
  return (m_ - m_min_ > threshold_) ? Verdict::kDrift : Verdict::kNoChange;
}

void PageHinkley::do_reset() {
  n_ = 0;
  x_mean_ = 0.0;
  m_ = 0.0;
  m_min_ = std::numeric_limits<double>::infinity();
}

}  // namespace curie
