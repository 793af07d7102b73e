#include "xeq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace xeq::stats {

double sum(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc;
}

double mean(std::span<const double> xs) {
  return xs.empty() ? std::numeric_limits<double>::quiet_NaN()
                    : sum(xs) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const auto n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(n - 1);
}

double sample_sd(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs));
}

bool is_constant(std::span<const double> xs) {
  if (xs.empty()) return true;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return *lo == *hi;
}

namespace {

// Lentz continued fraction for the incomplete beta.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double ibeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  return ibeta(df / 2.0, 0.5, df / (df + t * t));
}

double f_survival(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  if (!std::isfinite(f)) return 0.0;
  return ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

}  // namespace xeq::stats
