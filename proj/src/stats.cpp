#include "curie/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace curie {

namespace {

// Regularized incomplete gamma P(a,x) by series, Q(a,x) by continued
// fraction; the usual split at x < a + 1.
double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

}  // namespace

double chi_squared_sf(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

double nemenyi_q(int k, double alpha) {
  // Critical values of the studentized range statistic divided by sqrt(2).
  static constexpr double q10[] = {1.644854, 2.052293, 2.291341, 2.459516, 2.588521,
                                   2.692732, 2.779884, 2.854606, 2.919889};
  static constexpr double q05[] = {1.959964, 2.343701, 2.569032, 2.727774, 2.849705,
                                   2.948320, 3.030879, 3.101730, 3.163684};
  static constexpr double q01[] = {2.575829, 2.913494, 3.113250, 3.254685, 3.363740,
                                   3.452213, 3.526470, 3.590339, 3.646291};
  if (k < 2 || k > 10) throw std::invalid_argument("nemenyi_q: k must be in 2..10");
  const int i = k - 2;
  if (alpha == 0.10) return q10[i];
  if (alpha == 0.05) return q05[i];
  if (alpha == 0.01) return q01[i];
  throw std::invalid_argument("nemenyi_q: alpha must be 0.10, 0.05 or 0.01");
}

RankTable friedman_nemenyi(const std::vector<std::vector<double>>& scores,
                           bool higher_is_better,
                           std::vector<std::string> names, double alpha) {
  const int k = static_cast<int>(scores.size());
  if (k < 2) throw std::invalid_argument("friedman_nemenyi: need at least 2 methods");
  const int n = static_cast<int>(scores.front().size());
  if (n < 2) throw std::invalid_argument("friedman_nemenyi: need at least 2 datasets");
  for (const auto& row : scores) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("friedman_nemenyi: ragged score matrix");
  }

  RankTable table;
  table.k = k;
  table.n_datasets = n;
  table.alpha = alpha;
  if (names.empty()) {
    for (int i = 0; i < k; ++i) names.push_back("method" + std::to_string(i));
  }
  table.names = std::move(names);
  table.ranks.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(n), 0.0));

  std::vector<int> order(static_cast<std::size_t>(k));
  for (int col = 0; col < n; ++col) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double va = scores[static_cast<std::size_t>(a)][static_cast<std::size_t>(col)];
      const double vb = scores[static_cast<std::size_t>(b)][static_cast<std::size_t>(col)];
      if (va != vb) return higher_is_better ? va > vb : va < vb;
      return a < b;
    });
    // Average-rank convention over runs of exactly equal scores.
    int i = 0;
    while (i < k) {
      int j = i;
      const double v = scores[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]
                             [static_cast<std::size_t>(col)];
      while (j + 1 < k &&
             scores[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])]
                   [static_cast<std::size_t>(col)] == v) {
        ++j;
      }
      const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (int m = i; m <= j; ++m) {
        table.ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(m)])]
                   [static_cast<std::size_t>(col)] = avg_rank;
      }
      i = j + 1;
    }
  }

  table.mean_ranks.resize(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) {
    double sum = 0.0;
    for (double r : table.ranks[static_cast<std::size_t>(m)]) sum += r;
    table.mean_ranks[static_cast<std::size_t>(m)] = sum / static_cast<double>(n);
  }

  const double center = static_cast<double>(k + 1) / 2.0;
  double ssq = 0.0;
  for (double r : table.mean_ranks) ssq += (r - center) * (r - center);
  table.friedman_chi2 =
      12.0 * static_cast<double>(n) / (static_cast<double>(k) * (k + 1.0)) * ssq;

  const double denom = static_cast<double>(n) * (k - 1.0) - table.friedman_chi2;
  table.iman_davenport_f = denom > 0.0
                               ? (static_cast<double>(n) - 1.0) * table.friedman_chi2 / denom
                               : std::numeric_limits<double>::infinity();

  table.chi2_p_value = chi_squared_sf(table.friedman_chi2, static_cast<double>(k - 1));
  table.significant = table.chi2_p_value < alpha;

  table.critical_difference =
      nemenyi_q(k, alpha) *
      std::sqrt(static_cast<double>(k) * (k + 1.0) / (6.0 * static_cast<double>(n)));
  return table;
}

}  // namespace curie
