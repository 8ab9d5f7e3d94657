#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "brw/lattice.hpp"

namespace brw {

/// Quantile of the standard normal distribution, p in (0, 1).
double normal_quantile(double p);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion. Throws BadCounts.
Interval bernoulli_ci(std::int64_t hits, std::int64_t trials, double level = 0.95);

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// OLS of log p on log x. Throws DegenerateInput for fewer than 3 points,
/// nonpositive coordinates or a single distinct x.
PowerFit tail_exponent_fit(const std::vector<std::pair<double, double>>& points);

/// Right-continuous empirical CDF of a sample.
StepCdf empirical_cdf(std::vector<double> sample);

/// sup_t |F(t) - G(t)|, evaluated on the union of both jump sets. Throws
/// GridMismatch for empty, unsorted or non-monotone inputs.
double ks_distance(const StepCdf& a, const StepCdf& b);

enum class Trend { Approaching, Drifting };

constexpr const char* to_string(Trend t) noexcept { return t == Trend::Approaching ? "approaching" : "drifting"; }

struct Plateau {
  double estimate = 0.0;
  Trend trend = Trend::Approaching;
  /// w[i+1] - w[i].
  std::vector<double> differences;
};

/// Last-point estimate of lim w(x). The trend is Approaching when the
/// successive |differences| never grow. Needs >= 4 points with
/// x_last >= 4 x_first; throws DegenerateInput otherwise.
Plateau plateau_constant(const std::vector<std::pair<double, double>>& w_points);

struct EstimateRow {
  std::string label;
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t hits = 0;
  std::int64_t trials = 0;
  double bias_bound = 0.0;
  std::uint64_t seed = 0;
};

/// Rows of Monte Carlo estimates. add() rejects negative SE and hits > trials
/// with BadCounts.
class EstimateTable {
 public:
  void add(EstimateRow row);
  const std::vector<EstimateRow>& rows() const noexcept { return rows_; }

 private:
  std::vector<EstimateRow> rows_;
};

}  // namespace brw
