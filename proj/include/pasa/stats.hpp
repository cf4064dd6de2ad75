#pragma once

#include <vector>

namespace pasa {

/// Upper quantile of Student's t distribution with df degrees of freedom:
/// returns t such that P(T <= t) = p, for p in (0.5, 1).
double t_quantile(int df, double p);

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width = 0.0;
};

/// Sample mean with a two-sided t confidence interval at the given level
/// (e.g. 0.95).  A single observation yields a zero-width interval.
MeanCi mean_ci(const std::vector<double>& values, double level);

double sample_mean(const std::vector<double>& values);
double sample_variance(const std::vector<double>& values);  // unbiased

}  // namespace pasa
