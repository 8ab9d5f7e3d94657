#include "doctest.h"

#include <cmath>
#include <vector>

#include "brw/estimators.hpp"
#include "brw/lattice.hpp"

using namespace brw;

namespace {

const ModelParams& canonical() {
  static const ModelParams m = make_model(double_or_nothing(), rademacher());
  return m;
}

// Shared x_max = 1024 solve; about three seconds.
const TailFunction& wide_tail() {
  static const TailFunction u = solve_all_time_tail(canonical(), 1024);
  return u;
}

bool non_increasing(const Eigen::VectorXd& v, double slack = 1e-14) {
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

}  // namespace

TEST_CASE("all-time tail basics") {
  const TailFunction& u = wide_tail();
  for (std::int64_t x : {-5, -1, 0}) CHECK(u(x) == 1.0);
  CHECK(u(u.x_max + 1) == 0.0);
  CHECK(u.values.minCoeff() >= 0.0);
  CHECK(u.values.maxCoeff() <= 1.0);
  CHECK(non_increasing(u.values));
  CHECK(u.residual <= 1e-11);
  CHECK(fixed_point_residual(canonical(), u) == doctest::Approx(u.residual));
  CHECK(u.last_change <= 1e-12);
  for (const auto& w : u.warnings) CHECK(w.rfind("GridTooSmall", 0) == 0);
}

TEST_CASE("u(1) regression value and grid agreement") {
  // Frozen from the reference run at x_max = 1024, tol = 1e-12.
  constexpr double kU1 = 0.34354046782479519;
  CHECK(std::abs(wide_tail()(1) - kU1) < 1e-11);
  const TailFunction half = solve_all_time_tail(canonical(), 512);
  CHECK(std::abs(half(1) - wide_tail()(1)) < 1e-9);
}

TEST_CASE("small tail values by hand") {
  // P{M >= 1} >= P{M_1 >= 1} = a_1 (1 - p_0) = 1/4.
  CHECK(wide_tail()(1) > 0.25);
  const SpaceTimeTail st = evolve_space_time_tail(canonical(), 2, 10);
  CHECK(st(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(st(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(st(1, -1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st(1, 2) == 0.0);
  // v_2(2) = a_1 Q(v_1(1)) with Q(s) = s - s^2/2.
  CHECK(st(2, 2) == doctest::Approx(0.5 * (0.25 - 0.25 * 0.25 / 2)).epsilon(1e-15));
}

TEST_CASE("tail decays like 6 eta^2 / (sigma^2 x^2)") {
  const TailFunction& u = wide_tail();
  const ModelParams& m = canonical();
  std::vector<std::pair<double, double>> pts;
  for (std::int64_t x : {32, 64, 128, 256}) pts.emplace_back(static_cast<double>(x), u(x));
  CHECK(std::abs(tail_exponent_fit(pts).slope + 2.0) <= 0.1);

  const auto plateau = plateau_scan(u, m.beta, {32, 64, 128, 256});
  CHECK(std::abs(plateau[2].normalized - 1.0) <= 0.15);
  CHECK(std::abs(plateau[3].normalized - 1.0) < std::abs(plateau[1].normalized - 1.0));
  std::vector<std::pair<double, double>> w;
  for (const auto& p : plateau) w.emplace_back(static_cast<double>(p.x), p.normalized);
  CHECK(plateau_constant(w).trend == Trend::Approaching);
}

TEST_CASE("plateau scan of an exact power law is flat") {
  const ModelParams m = make_model(geometric_offspring(), lazy_step(0.25));
  TailFunction exact;
  exact.x_max = 100;
  exact.values.resize(101);
  exact.values[0] = 1.0;
  for (int x = 1; x <= 100; ++x) exact.values[x] = std::min(1.0, m.c_const / (x * x));
  for (const auto& p : plateau_scan(exact, m.beta, {2, 10, 50, 100})) CHECK(p.normalized == doctest::Approx(1.0));
  CHECK(plateau_scan(exact, m.beta).size() == 100);
  CHECK_THROWS_AS(plateau_scan(exact, m.beta, {101}), Error);
}

TEST_CASE("tail operator maps monotone inputs to monotone outputs in [0,1]") {
  RngStream rng(21, 0);
  for (const StepLaw& step : {rademacher(), make_step_law({{-3, 0.2}, {-1, 0.3}, {1, 0.3}, {3, 0.2}})}) {
    const ModelParams m = make_model(poisson_offspring(), step);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd f(60);
      f[0] = 1.0;
      for (int i = 1; i < 60; ++i) f[i] = f[i - 1] * rng.uniform();
      const Eigen::VectorXd g = apply_tail_operator(m, f);
      REQUIRE(g[0] == 1.0);
      REQUIRE(g.minCoeff() >= 0.0);
      REQUIRE(g.maxCoeff() <= 1.0);
      REQUIRE(non_increasing(g));
    }
  }
}

TEST_CASE("convolution by hand") {
  const StepLaw step = make_step_law({{-1, 0.25}, {0, 0.5}, {1, 0.25}});
  Eigen::VectorXd g(4);
  g << 0.9, 0.4, 0.2, 0.1;
  const Eigen::VectorXd out = convolve_clamped(step, g, 1.0);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(0.25 * 0.9 + 0.5 * 0.4 + 0.25 * 0.2));
  CHECK(out[3] == doctest::Approx(0.25 * 0.2 + 0.5 * 0.1));
  const Eigen::VectorXd all = convolve_clamped(step, g, 1.0, 0);
  CHECK(all[0] == doctest::Approx(0.25 * 1.0 + 0.5 * 0.9 + 0.25 * 0.4));
}

TEST_CASE("solver errors") {
  SolveOptions opt;
  opt.iter_cap = 5;
  CHECK_THROWS_AS(solve_all_time_tail(canonical(), 64, opt), Error);
  opt = {};
  opt.tol = 1e-15;
  CHECK_THROWS_AS(solve_all_time_tail(canonical(), 64, opt), Error);
  CHECK_THROWS_AS(solve_all_time_tail(canonical(), 0), Error);
  // A tight grid leaves u(x_max) far above tol.
  const TailFunction small = solve_all_time_tail(canonical(), 16);
  REQUIRE(small.warnings.size() == 1);
  CHECK(small.warnings[0].rfind("GridTooSmall", 0) == 0);
}

TEST_CASE("reproduce-first ordering") {
  const TailFunction& u = wide_tail();
  const TailFunction alt = alternate_order_tail(canonical(), u);
  CHECK(alt.left_value == 0.5);
  for (std::int64_t x = 0; x <= u.x_max; ++x) REQUIRE(alt(x) <= u(x));
  const TailFunction direct = solve_reproduce_first_tail(canonical(), u.x_max);
  CHECK((direct.values - alt.values).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(alt(128) / u(128) - 1.0) <= 0.05);
}

TEST_CASE("space-time tail") {
  const std::int64_t x_max = 400;
  const SpaceTimeTail st = evolve_space_time_tail(canonical(), 1000, x_max);
  CHECK(st.warnings.empty());
  CHECK(st.n_max() == 1000);
  for (std::int64_t x = -x_max; x <= x_max; ++x) REQUIRE(st(0, x) == (x <= 0 ? 1.0 : 0.0));
  for (std::int64_t n = 0; n <= 1000; ++n) {
    REQUIRE(std::abs(st(n, -x_max) - st.q[n]) <= 1e-9);
    REQUIRE(non_increasing(st.slices[n]));
  }
  CHECK(st(5, -x_max - 3) == st.q[5]);

  // M_n <= M, and the first k sweeps of the all-time iteration dominate v_k.
  const TailFunction& u = wide_tail();
  Eigen::VectorXd uk = Eigen::VectorXd::Zero(x_max + 1);
  uk[0] = 1.0;
  for (std::int64_t k = 1; k <= 1000; ++k) {
    uk = apply_tail_operator(canonical(), uk);
    for (std::int64_t x = 1; x <= x_max; ++x) {
      REQUIRE(st(k, x) <= u(x) + 1e-12);
      if (k <= 50) REQUIRE(st(k, x) <= uk[x] + 1e-15);
      REQUIRE(uk[x] <= u(x) + 1e-12);
    }
  }
}

TEST_CASE("a narrow space-time grid is reported") {
  CHECK_THROWS_AS(evolve_space_time_tail(canonical(), 400, 20), Error);
  const SpaceTimeTail st = evolve_space_time_tail(canonical(), 400, 20, false);
  REQUIRE(st.warnings.size() == 1);
  CHECK(st.warnings[0].rfind("GridTooSmall", 0) == 0);
}

TEST_CASE("conditional CDF") {
  const SpaceTimeTail st = evolve_space_time_tail(canonical(), 100, 200);
  const ConditionalCdf g = conditional_cdf(st, 100);
  CHECK(g.cdf.value.front() <= 1e-6);
  CHECK(std::abs(g.cdf.value.back() - 1.0) <= 1e-6);
  for (std::size_t i = 1; i < g.cdf.value.size(); ++i) {
    REQUIRE(g.cdf.x[i] > g.cdf.x[i - 1]);
    REQUIRE(g.cdf.value[i] >= g.cdf.value[i - 1] - 1e-12);
  }
  CHECK(g(-100.0) == 0.0);
  CHECK(g(100.0) == 1.0);
  // G(x) = P{M_n < ceil(x sqrt n)} and the step CDF P{M_n <= t sqrt n} agree off the jumps.
  for (double x : {-1.05, -0.33, 0.07, 0.55, 1.21}) CHECK(g(x) == doctest::Approx(g.cdf(x)));
  CHECK_THROWS_AS(conditional_cdf(st, 101), Error);
}

TEST_CASE("step CDF lookup") {
  StepCdf f{{0.0, 1.0, 2.0}, {0.2, 0.5, 1.0}};
  CHECK(f(-1.0) == 0.0);
  CHECK(f(0.0) == 0.2);
  CHECK(f(0.99) == 0.2);
  CHECK(f(1.0) == 0.5);
  CHECK(f(5.0) == 1.0);
}

TEST_CASE("superposition tail") {
  const TailFunction& u = wide_tail();
  const double c = canonical().c_const;
  for (std::int64_t x : {1, 7, 40}) CHECK(superposition_tail(u, 1, static_cast<double>(x)) == u(x));
  for (double x : {1.0, 1.5, 2.0, 3.0}) {
    CAPTURE(x);
    CHECK(std::abs(superposition_tail(u, 10000, x) - (1.0 - std::exp(-c / (x * x)))) <= 0.02);
  }
  double prev = 1.0;
  for (double x = 0.5; x <= 10.0; x += 0.5) {
    const double p = superposition_tail(u, 10000, x);
    REQUIRE(p <= prev);
    prev = p;
  }
  CHECK(prev < 0.07);
  CHECK_THROWS_AS(superposition_tail(u, 10000, 10.3), Error);
}
