#pragma once

#include <string>
#include <vector>

namespace curie {

/// Friedman rank comparison plus the Nemenyi critical difference.
struct RankTable {
  std::vector<std::string> names;            // one per method (row)
  std::vector<std::vector<double>> ranks;    // methods x datasets, 1 = best
  std::vector<double> mean_ranks;
  double critical_difference = 0.0;          // q_alpha(k) * sqrt(k(k+1)/(6N))
  double friedman_chi2 = 0.0;
  double iman_davenport_f = 0.0;
  double chi2_p_value = 1.0;
  bool significant = false;
  double alpha = 0.05;
  int k = 0;
  int n_datasets = 0;
};

/// Rank k methods over N datasets (scores is k rows by N columns, no missing
/// values). Per dataset the best score gets rank 1; exact ties share the
/// average of the ranks they span. Reports the Friedman chi-square, the
/// Iman-Davenport F, and the Nemenyi critical difference at the given alpha.
RankTable friedman_nemenyi(const std::vector<std::vector<double>>& scores,
                           bool higher_is_better,
                           std::vector<std::string> names = {},
                           double alpha = 0.05);

/// Studentized-range-based q constant for the Nemenyi test.
/// Supported: alpha in {0.10, 0.05, 0.01}, k in 2..10.
double nemenyi_q(int k, double alpha);

/// Upper tail of the chi-squared distribution, via the regularized
/// incomplete gamma function.
double chi_squared_sf(double x, double df);

}  // namespace curie
