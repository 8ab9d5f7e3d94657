#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "brw/estimators.hpp"
#include "brw/gw.hpp"
#include "brw/lattice.hpp"
#include "brw/simulate.hpp"

using namespace brw;

namespace {

const ModelParams& canonical() {
  static const ModelParams m = make_model(double_or_nothing(), rademacher());
  return m;
}

}  // namespace

TEST_CASE("a particle that steps right and dies leaves M = 0") {
  const RngStream parent(7, 0);
  int found = 0;
  for (std::uint64_t i = 0; i < 64 && found < 3; ++i) {
    RngStream rng = parent.child(i);
    RngStream peek = rng;
    if (sample_step(rademacher(), peek) != 1 || sample_offspring(double_or_nothing(), peek) != 0) continue;
    ++found;
    const RunRecord r = simulate_tree(canonical(), {}, rng);
    CHECK(r.max_overall == 0);
    CHECK(r.extinction_gen == 1);
    CHECK_FALSE(r.censored);
  }
  CHECK(found == 3);
}

TEST_CASE("trajectory bookkeeping") {
  SimOptions opt;
  opt.gen_cap = 200;
  opt.record_trajectory = true;
  const RngStream parent(8, 0);
  for (std::uint64_t i = 0; i < 300; ++i) {
    RngStream rng = parent.child(i);
    const RunRecord r = simulate_tree(canonical(), opt, rng);
    REQUIRE(r.max_overall >= 0);
    REQUIRE(r.min_overall <= 0);
    REQUIRE(r.gen_maxima.size() == r.gen_counts.size());
    REQUIRE(r.gen_maxima.front() == 0);
    std::int64_t m = 0;
    for (std::int64_t x : r.gen_maxima)
      if (x != kExtinct) m = std::max(m, x);
    REQUIRE(m == r.max_overall);
    REQUIRE(static_cast<std::int64_t>(r.gen_maxima.size()) == r.extinction_gen + 1);
    if (!r.censored) REQUIRE(r.gen_counts.back() == 0);
  }
}

TEST_CASE("frontier stays sorted with positive counts that sum to N") {
  Frontier f{{0, 1000}}, scratch;
  RngStream rng(3, 3);
  for (int n = 0; n < 50; ++n) {
    const std::int64_t total = advance_frontier(canonical(), f, scratch, rng);
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      REQUIRE(f[i].second >= 1);
      if (i > 0) REQUIRE(f[i - 1].first < f[i].first);
      sum += f[i].second;
    }
    REQUIRE(sum == total);
    if (total == 0) break;
  }
}

TEST_CASE("mean generation size stays at one") {
  SimOptions opt;
  opt.gen_cap = 10;
  opt.record_trajectory = true;
  const std::int64_t trees = 100000;
  const auto records = simulate_trees(canonical(), trees, opt, 5, 17);
  for (int n : {1, 5, 10}) {
    double sum = 0;
    for (const auto& r : records)
      if (static_cast<std::size_t>(n) < r.gen_counts.size()) sum += static_cast<double>(r.gen_counts[n]);
    // Var N_n = n sigma^2 for a critical process.
    CHECK(std::abs(sum / trees - 1.0) < 4.0 * std::sqrt(n / static_cast<double>(trees)));
  }
}

TEST_CASE("tail estimate agrees with the fixed-point solver") {
  const TailFunction u = solve_all_time_tail(canonical(), 256);
  const std::int64_t gen_cap = 2000;
  const TailEstimate est = estimate_tail(canonical(), 20000, gen_cap, {2, 4, 8}, 20240611);
  const double bias = survival_probabilities(double_or_nothing(), gen_cap).q[gen_cap];
  for (const auto& row : est.rows) {
    CAPTURE(row.x);
    CHECK(row.bias_bound == bias);
    CHECK(std::abs(row.p_hat - u(row.x)) <= 3.5 * row.se + bias);
  }
}

TEST_CASE("integer tallies do not depend on the thread count") {
  const auto a = estimate_tail(canonical(), 3000, 500, {1, 3, 9}, 77, 1);
  const auto b = estimate_tail(canonical(), 3000, 500, {1, 3, 9}, 77, 4);
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(a.censored == b.censored);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].hits == b.rows[i].hits);

  SimOptions opt;
  opt.gen_cap = 300;
  const RngStream rng(12, 0);
  const RunRecord s1 = simulate_superposition(canonical(), 500, opt, rng, 1);
  const RunRecord s3 = simulate_superposition(canonical(), 500, opt, rng, 3);
  CHECK(s1.max_overall == s3.max_overall);
  CHECK(s1.min_overall == s3.min_overall);
  CHECK(s1.extinction_gen == s3.extinction_gen);
}

TEST_CASE("superposition of one tree is the tree") {
  SimOptions opt;
  opt.gen_cap = 1000;
  const RngStream parent(13, 0);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const RngStream rng = parent.child(i);
    RngStream first = rng.child(0);
    const RunRecord single = simulate_tree(canonical(), opt, first);
    const RunRecord sup = simulate_superposition(canonical(), 1, opt, rng);
    REQUIRE(single.max_overall == sup.max_overall);
    REQUIRE(single.extinction_gen == sup.extinction_gen);
  }
}

TEST_CASE("superposition hit frequency matches 1 - (1 - u)^n") {
  // n = 100 trees, level ceil(10 * 1.5) = 15.
  const std::int64_t n = 100;
  const TailFunction u = solve_all_time_tail(canonical(), 256);
  const double expected = superposition_tail(u, n, 1.5);
  SimOptions opt;
  opt.gen_cap = 20000;
  opt.stop_level = 15;
  const RngStream parent(14, 0);
  const int reps = 600;
  int hits = 0;
  for (int i = 0; i < reps; ++i) hits += simulate_superposition(canonical(), n, opt, parent.child(i)).reached_stop_level;
  const double p = static_cast<double>(hits) / reps;
  const double bias = n * survival_probabilities(double_or_nothing(), opt.gen_cap).q[opt.gen_cap];
  CHECK(std::abs(p - expected) <= 4.0 * std::sqrt(expected * (1 - expected) / reps) + bias);
}

TEST_CASE("the leftmost position mirrors the maximum for a symmetric step") {
  SimOptions opt;
  opt.gen_cap = 2000;
  const auto records = simulate_trees(canonical(), 20000, opt, 15, 1);
  std::vector<double> right, left;
  for (const auto& r : records) {
    right.push_back(static_cast<double>(r.max_overall));
    left.push_back(static_cast<double>(-r.min_overall));
  }
  // Two-sample KS critical value at the 1% level is 1.63 sqrt(2/n).
  CHECK(ks_distance(empirical_cdf(right), empirical_cdf(left)) < 1.63 * std::sqrt(2.0 / 20000));
}

TEST_CASE("conditioned sampler") {
  const RngStream parent(16, 0);
  double attempts = 0;
  const int samples = 4000;
  for (int i = 0; i < samples; ++i) {
    const RunRecord r = simulate_conditioned(canonical(), 1, parent.child(i));
    REQUIRE(r.censored);
    REQUIRE(r.extinction_gen == 1);
    attempts += static_cast<double>(r.attempts);
  }
  // Attempts are geometric with success 1/2: mean 2, variance 2.
  CHECK(std::abs(attempts / samples - 2.0) < 4.0 * std::sqrt(2.0 / samples));

  // One in ~400 trees lives 400 generations; three attempts all but surely fail.
  bool budget = false;
  try {
    simulate_conditioned(canonical(), 400, parent, 3);
  } catch (const Error& e) {
    budget = e.code() == Errc::AttemptBudgetExceeded;
  }
  CHECK(budget);
}

TEST_CASE("conditioned maximum matches the recursion at n = 25") {
  const std::int64_t n = 25;
  const SpaceTimeTail st = evolve_space_time_tail(canonical(), n, 100);
  const ConditionalCdf g = conditional_cdf(st, n);
  const RngStream parent(17, 0);
  std::vector<double> scaled;
  for (int i = 0; i < 2000; ++i) {
    const RunRecord r = simulate_conditioned(canonical(), n, parent.child(i));
    REQUIRE(r.last_gen_max != kExtinct);
    scaled.push_back(static_cast<double>(r.last_gen_max) / std::sqrt(static_cast<double>(n)));
  }
  CHECK(ks_distance(empirical_cdf(scaled), g.cdf) <= 0.05);
}
