#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "brw/laws.hpp"

using namespace brw;

namespace {

// Direct pgf f(s) = sum p_k s^k, independent of the Horner forms in the library.
double pgf(const OffspringLaw& law, double s) {
  double out = 0.0;
  for (Eigen::Index k = 0; k < law.probs().size(); ++k) out += law.probs()[k] * std::pow(s, static_cast<double>(k));
  return out;
}

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return Errc::IoFailure;
}

}  // namespace

TEST_CASE("offspring law construction") {
  const OffspringLaw don = make_offspring_law({{0, 0.5}, {2, 0.5}});
  CHECK(don.variance() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(don.third_moment() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(don.mean() == doctest::Approx(1.0));

  // sum k^2 2^-(k+1) over k <= 60, renormalized, minus one.
  double m0 = 0, m2 = 0;
  for (int k = 0; k <= 60; ++k) {
    const double p = std::ldexp(1.0, -(k + 1));
    m0 += p;
    m2 += static_cast<double>(k) * k * p;
  }
  const OffspringLaw geom = geometric_offspring(60);
  CHECK(std::abs(geom.variance() - (m2 / m0 - 1.0)) < 1e-12);
  CHECK(std::abs(geom.variance() - 2.0) < 1e-12);
  CHECK(geom.truncation_error() > 0.0);

  CHECK(code_of([] { make_offspring_law({{1, 1.0}}); }) == Errc::DegenerateVariance);
  CHECK(code_of([] { make_offspring_law({{0, 0.6}, {2, 0.6}}); }) == Errc::NotNormalized);
  CHECK(code_of([] { make_offspring_law({{0, 0.4}, {2, 0.6}}); }) == Errc::NotCritical);
  CHECK(code_of([] { make_offspring_law({{0, -0.1}, {1, 0.2}, {2, 0.9}}); }) == Errc::NotNormalized);
}

TEST_CASE("decimal inputs are renormalized but the mean is not adjusted") {
  const OffspringLaw law = make_offspring_law({{0, 0.3333333}, {1, 0.3333333}, {2, 0.3333333}});
  CHECK(law.probs().sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(law.variance() == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("step law construction") {
  CHECK(rademacher().variance() == 1.0);
  const StepLaw lazy = make_step_law({{-1, 0.25}, {0, 0.5}, {1, 0.25}});
  CHECK(lazy.variance() == doctest::Approx(0.5));
  CHECK(lazy_step(0.5).variance() == doctest::Approx(0.5));
  CHECK(std::isinf(lazy.verified_moment_order()));
  CHECK(code_of([] { make_step_law({{-1, 0.75}, {1, 0.25}}); }) == Errc::NonzeroDrift);
  CHECK(code_of([] { make_step_law({{0, 1.0}}); }) == Errc::DegenerateVariance);
  CHECK(code_of([] { make_step_law({{-1, 0.5}, {1, 0.6}}); }) == Errc::NotNormalized);

  CHECK(lazy.at_least(-5) == 1.0);
  CHECK(lazy.at_least(0) == doctest::Approx(0.75));
  CHECK(lazy.at_least(1) == doctest::Approx(0.25));
  CHECK(lazy.at_least(2) == 0.0);
}

TEST_CASE("heavy-tail step law") {
  const StepLaw heavy = heavy_tail_step_law(0.5, 1'000'000);
  CHECK(std::abs(heavy.probs().sum() - 1.0) < 1e-12);
  CHECK(std::abs(heavy.mean()) < 1e-12);
  CHECK(heavy.verified_moment_order() == doctest::Approx(3.5));
  CHECK(heavy.a(0) == 0.0);
  for (std::int64_t x : {1, 2, 17, 999, 1'000'000}) CHECK(heavy.a(x) == heavy.a(-x));
  CHECK(heavy.a(2) / heavy.a(1) == doctest::Approx(std::pow(2.0, -4.5)));

  const StepLaw other = heavy_tail_step_law(1.5, 1000);
  for (std::int64_t x = 1; x <= 1000; ++x) REQUIRE(other.a(x) == other.a(-x));

  CHECK(code_of([] { heavy_tail_step_law(0.5, 999); }) == Errc::CutoffTooSmall);
  CHECK(code_of([] { heavy_tail_step_law(2.0, 1000); }) == Errc::OutOfRange);
}

TEST_CASE("Q, h and H agree with the pgf") {
  const OffspringLaw don = double_or_nothing();
  CHECK(q_eval(don, 0.0) == 0.0);
  CHECK(q_eval(don, 1.0) == doctest::Approx(0.5));
  CHECK(q_eval(don, 0.5) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(big_h_eval(don, 0.0) == 0.0);
  CHECK(big_h_eval(don, 1.0) == doctest::Approx(0.5));
  CHECK(big_h_eval(don, 0.4) == doctest::Approx(0.2).epsilon(1e-15));

  for (const OffspringLaw& law : {don, geometric_offspring(), poisson_offspring(),
                                  make_offspring_law({{0, 0.4}, {1, 0.4}, {3, 0.2}})}) {
    CAPTURE(law.label());
    CHECK(q_eval(law, 1.0) == doctest::Approx(1.0 - law.p(0)).epsilon(1e-14));
    CHECK(big_h_eval(law, 1.0) == doctest::Approx(law.p(0)).epsilon(1e-12));
    for (double s : {0.05, 0.3, 0.77, 0.999}) {
      CHECK(q_eval(law, s) == doctest::Approx(1.0 - pgf(law, 1.0 - s)).epsilon(1e-12));
      CHECK(h_eval(law, s) == doctest::Approx(s - q_eval(law, s)).epsilon(1e-10));
      CHECK(big_h_eval(law, s) == doctest::Approx(h_eval(law, s) / s).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(q_eval(don, 1.5), Error);
  CHECK_THROWS_AS(h_eval(don, -0.1), Error);
  CHECK_THROWS_AS(big_h_eval(don, 2.0), Error);
}

TEST_CASE("h(s) against sigma^2 s^2 / 2 near zero") {
  for (const OffspringLaw& law : {double_or_nothing(), geometric_offspring(), poisson_offspring()}) {
    CAPTURE(law.label());
    // Taylor: h(s) = sigma^2 s^2/2 - E[X(X-1)(X-2)] s^3/6 + ..., so the
    // relative gap is below E[X(X-1)(X-2)]/(3 sigma^2) * s.
    const double falling3 = law.third_moment() - 3.0 * (law.variance() + 1.0) + 2.0;
    const double c = std::abs(falling3) / (3.0 * law.variance()) + 1e-9;
    for (double s : {1e-3, 1e-4, 1e-6, 1e-8}) {
      const double ratio = h_eval(law, s) / (law.variance() * s * s / 2.0);
      CHECK(std::abs(ratio - 1.0) <= c * s + 1e-12);
    }
  }
}

TEST_CASE("Q is concave, increasing and below the diagonal; H is increasing") {
  for (const OffspringLaw& law : {double_or_nothing(), geometric_offspring(), poisson_offspring()}) {
    std::vector<double> q, hh;
    for (int i = 0; i <= 1000; ++i) {
      const double s = i / 1000.0;
      q.push_back(q_eval(law, s));
      hh.push_back(big_h_eval(law, s));
      REQUIRE(q.back() <= s + 1e-15);
    }
    for (int i = 1; i <= 1000; ++i) {
      REQUIRE(q[i] >= q[i - 1]);
      REQUIRE(hh[i] >= hh[i - 1] - 1e-15);
    }
    for (int i = 1; i < 1000; ++i) REQUIRE(q[i - 1] + q[i + 1] <= 2.0 * q[i] + 1e-14);
  }
}

TEST_CASE("q_apply matches q_eval") {
  const OffspringLaw law = poisson_offspring();
  Eigen::ArrayXd s = Eigen::ArrayXd::LinSpaced(11, 0.0, 1.0);
  const Eigen::ArrayXd out = q_apply(law, s);
  for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(out[i] == q_eval(law, s[i]));
}

TEST_CASE("model constants") {
  for (const OffspringLaw& law : {double_or_nothing(), geometric_offspring(), poisson_offspring()}) {
    for (const StepLaw& step : {rademacher(), lazy_step(0.5), heavy_tail_step_law(0.5, 1000)}) {
      const ModelParams m = make_model(law, step);
      CHECK(m.c_const == doctest::Approx(6.0 * step.variance() / law.variance()));
      CHECK(std::abs(m.c_const * m.beta * m.beta - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("sampling frequencies") {
  RngStream rng(11, 1);
  const int n = 1'000'000;

  const OffspringLaw don = double_or_nothing();
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(sample_offspring(don, rng));
  CHECK(std::abs(sum / n - 1.0) < 4.0 * std::sqrt(don.variance() / n));

  std::int64_t plus = 0;
  for (int i = 0; i < n; ++i) plus += sample_step(rademacher(), rng) == 1;
  CHECK(std::abs(static_cast<double>(plus) / n - 0.5) < 4.0 * std::sqrt(0.25 / n));

  // Chi-square against a 4-point step law: 3 degrees of freedom, the 99.99%
  // quantile is 21.108.
  const StepLaw step = make_step_law({{-2, 0.4}, {-1, 0.1}, {1, 0.1}, {2, 0.4}}, "x");
  std::map<std::int64_t, double> counts;
  for (int i = 0; i < n; ++i) counts[sample_step(step, rng)] += 1.0;
  double chi2 = 0;
  for (const auto& [x, p] : step.support()) chi2 += std::pow(counts[x] - n * p, 2) / (n * p);
  CHECK(counts.size() == 4);
  CHECK(chi2 < 21.108);
}

TEST_CASE("sampling is reproducible and multinomial tallies add up") {
  RngStream a(3, 9), b(3, 9);
  for (int i = 0; i < 1000; ++i) REQUIRE(sample_offspring(poisson_offspring(), a) == sample_offspring(poisson_offspring(), b));

  RngStream rng(4, 4);
  for (std::int64_t count : {1, 15, 16, 1000, 123456}) {
    std::int64_t total = 0, weighted = 0;
    rademacher().sampler().multinomial(count, rng, [&](std::int64_t v, std::int64_t k) {
      CHECK(k > 0);
      total += k;
      weighted += v * k;
    });
    CHECK(total == count);
    CHECK(std::abs(static_cast<double>(weighted)) < 6.0 * std::sqrt(static_cast<double>(count)));
  }
}

TEST_CASE("law spec parser") {
  CHECK(parse_offspring_spec("don").variance() == 1.0);
  CHECK(parse_offspring_spec("geom").variance() == doctest::Approx(2.0));
  CHECK(parse_offspring_spec("poisson").variance() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(parse_offspring_spec("table:0=0.25,1=0.5,2=0.25").variance() == doctest::Approx(0.5));
  CHECK(parse_step_spec("rademacher").variance() == 1.0);
  CHECK(parse_step_spec("lazy:q=0.5").variance() == doctest::Approx(0.5));
  CHECK(parse_step_spec("table:-1=0.5,1=0.5").variance() == 1.0);
  CHECK(parse_step_spec("heavy:eps=0.5,cutoff=1000").verified_moment_order() == doctest::Approx(3.5));

  for (const char* bad : {"", "dom", "table:", "table:1=1.0", "table:0=x,2=0.5", "table:0=0.5,0=0.5"})
    CHECK(code_of([&] { parse_offspring_spec(bad); }) == Errc::BadLawSpec);
  for (const char* bad : {"gauss", "lazy:p=0.5", "lazy:q=1.5", "heavy:eps=0.5", "heavy:eps=0.5,cutoff=10",
                          "table:-1=0.75,1=0.25"})
    CHECK(code_of([&] { parse_step_spec(bad); }) == Errc::BadLawSpec);
}
