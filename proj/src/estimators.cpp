#include "brw/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "brw/error.hpp"

namespace brw {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(Errc::OutOfRange, "quantile level must lie in (0, 1)");
  // Acklam's rational approximation, then one Newton step on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

Interval bernoulli_ci(std::int64_t hits, std::int64_t trials, double level) {
  if (trials < 1 || hits < 0 || hits > trials)
    throw Error(Errc::BadCounts, "need 0 <= hits <= trials and trials >= 1");
  if (!(level > 0.0 && level < 1.0)) throw Error(Errc::OutOfRange, "level must lie in (0, 1)");
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  if (hits == 0) out.low = 0.0;
  if (hits == trials) out.high = 1.0;
  return out;
}

PowerFit tail_exponent_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw Error(Errc::DegenerateInput, "need at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, p] : points) {
    if (!(x > 0.0 && p > 0.0)) throw Error(Errc::DegenerateInput, "coordinates must be positive");
    mx += std::log(x);
    my += std::log(p);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, p] : points) {
    const double dx = std::log(x) - mx;
    const double dy = std::log(p) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(Errc::DegenerateInput, "all x coincide");
  PowerFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

StepCdf empirical_cdf(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  StepCdf out;
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (i + 1 < sample.size() && sample[i + 1] == sample[i]) continue;
    out.x.push_back(sample[i]);
    out.value.push_back(static_cast<double>(i + 1) / n);
  }
  return out;
}

namespace {

void check_cdf(const StepCdf& f) {
  if (f.x.empty() || f.x.size() != f.value.size()) throw Error(Errc::GridMismatch, "empty or ragged CDF grid");
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    if (!(f.value[i] >= -1e-12 && f.value[i] <= 1.0 + 1e-12)) throw Error(Errc::GridMismatch, "CDF value outside [0,1]");
    if (i > 0 && !(f.x[i] > f.x[i - 1])) throw Error(Errc::GridMismatch, "CDF grid not increasing");
    if (i > 0 && f.value[i] < f.value[i - 1] - 1e-12) throw Error(Errc::GridMismatch, "CDF decreases");
  }
}

}  // namespace

double ks_distance(const StepCdf& a, const StepCdf& b) {
  check_cdf(a);
  check_cdf(b);
  // Both functions are constant between consecutive union points, so the
  // sup is attained at one of them (or left of everything, where both are 0).
  double sup = 0.0;
  for (double t : a.x) sup = std::max(sup, std::abs(a(t) - b(t)));
  for (double t : b.x) sup = std::max(sup, std::abs(a(t) - b(t)));
  return sup;
}

Plateau plateau_constant(const std::vector<std::pair<double, double>>& w_points) {
  if (w_points.size() < 4) throw Error(Errc::DegenerateInput, "need at least 4 points");
  for (std::size_t i = 1; i < w_points.size(); ++i)
    if (!(w_points[i].first > w_points[i - 1].first)) throw Error(Errc::DegenerateInput, "x must increase");
  if (!(w_points.front().first > 0.0 && w_points.back().first >= 4.0 * w_points.front().first))
    throw Error(Errc::DegenerateInput, "points must span at least two doublings of x");
  Plateau out;
  out.estimate = w_points.back().second;
  for (std::size_t i = 1; i < w_points.size(); ++i)
    out.differences.push_back(w_points[i].second - w_points[i - 1].second);
  for (std::size_t i = 1; i < out.differences.size(); ++i) {
    if (std::abs(out.differences[i]) > std::abs(out.differences[i - 1]) + 1e-12) {
      out.trend = Trend::Drifting;
      break;
    }
  }
  return out;
}

void EstimateTable::add(EstimateRow row) {
  if (!(row.se >= 0.0)) throw Error(Errc::BadCounts, "standard error must be nonnegative");
  if (row.hits < 0 || row.trials < 0 || row.hits > row.trials)
    throw Error(Errc::BadCounts, "need 0 <= hits <= trials");
  rows_.push_back(std::move(row));
}

}  // namespace brw
