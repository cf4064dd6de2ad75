#include "pasa/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace pasa {

namespace {

// Continued fraction for the regularised incomplete beta function.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16, kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double beta_inc(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_cdf(int df, double t) {
  const double x = df / (df + t * t);
  const double tail = 0.5 * beta_inc(0.5 * df, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double t_quantile(int df, double p) {
  if (df < 1) throw std::invalid_argument("t_quantile: df must be >= 1");
  if (!(p > 0.5 && p < 1.0)) throw std::invalid_argument("t_quantile: p must lie in (0.5, 1)");
  double lo = 0.0, hi = 1.0;
  while (t_cdf(df, hi) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(df, mid) < p) lo = mid; else hi = mid;
    if (hi - lo < 1e-12 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

double sample_mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

double sample_variance(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = sample_mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return acc / static_cast<double>(n - 1);
}

MeanCi mean_ci(const std::vector<double>& values, double level) {
  MeanCi ci;
  ci.mean = sample_mean(values);
  const std::size_t n = values.size();
  if (n >= 2) {
    const double se = std::sqrt(sample_variance(values) / static_cast<double>(n));
    const double t = t_quantile(static_cast<int>(n) - 1, 0.5 + level / 2.0);
    ci.half_width = t * se;
  }
  ci.lo = ci.mean - ci.half_width;
  ci.hi = ci.mean + ci.half_width;
  return ci;
}

}  // namespace pasa
