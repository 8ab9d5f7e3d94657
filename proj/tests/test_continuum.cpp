#include "doctest.h"

#include <cmath>

#include "brw/continuum.hpp"
#include "brw/lattice.hpp"

using namespace brw;

TEST_CASE("closed-form profile") {
  for (auto [sigma, eta] : {std::pair{1.0, 1.0}, std::pair{std::sqrt(2.0), 0.5}, std::pair{0.7, 2.0}}) {
    CAPTURE(sigma);
    CHECK(phi_closed_form(0.0, sigma, eta) == 1.0);
    CHECK(phi_closed_form(std::sqrt(6.0) * eta / sigma, sigma, eta) == doctest::Approx(0.25).epsilon(1e-15));

    const double h = 1e-3, y = 2.0;
    const double fd = (phi_closed_form(y + h, sigma, eta) - 2.0 * phi_closed_form(y, sigma, eta) +
                       phi_closed_form(y - h, sigma, eta)) / (h * h);
    const double rhs = sigma * sigma * std::pow(phi_closed_form(y, sigma, eta), 2) / (eta * eta);
    CHECK(std::abs(fd - rhs) <= 1e-6);

    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double yi = 0.05 * i;
      const double p = phi_closed_form(yi, sigma, eta);
      worst = std::max(worst, std::abs(phi_closed_form_d2(yi, sigma, eta) - sigma * sigma * p * p / (eta * eta)));
    }
    CHECK(worst <= 1e-12);
  }
  CHECK_THROWS_AS(phi_closed_form(-0.1, 1.0, 1.0), Error);
  CHECK(phi_closed_form(2.0f, 1.0f, 1.0f) == doctest::Approx(phi_closed_form(2.0, 1.0, 1.0)).epsilon(1e-6));
}

TEST_CASE("shooting recovers the decaying solution") {
  const double sigma = 1.0, eta = 1.0;
  const PhiProfile phi = solve_phi_shooting(sigma, eta, 10.0 * std::sqrt(6.0));
  CHECK(std::abs(phi.slope0 + 2.0 * sigma / (std::sqrt(6.0) * eta)) <= 1e-8);
  CHECK(phi.bisection_steps > 0);
  double sup = 0.0;
  for (int i = 0; i <= 1000; ++i) sup = std::max(sup, std::abs(phi(0.01 * i) - phi_closed_form(0.01 * i, sigma, eta)));
  CHECK(sup <= 1e-6);

  for (Eigen::Index i = 0; i < phi.y.size(); ++i) {
    REQUIRE(phi.phi[i] > 0.0);
    REQUIRE(phi.phi[i] <= 1.0);
    REQUIRE(phi.dphi[i] < 0.0);
    if (i > 0) REQUIRE(phi.phi[i] < phi.phi[i - 1]);
    if (i > 0) REQUIRE(phi.dphi[i] > phi.dphi[i - 1]);  // convex
  }
  // Past the grid the tail extension stays close to the closed form.
  const double far = phi.y[phi.y.size() - 1] * 3.0;
  CHECK(phi(far) == doctest::Approx(phi_closed_form(far, sigma, eta)).epsilon(1e-4));
}

TEST_CASE("shooting for other parameters") {
  const double sigma = std::sqrt(2.0), eta = 0.5;
  const PhiProfile phi = solve_phi_shooting(sigma, eta, 12.0 * std::sqrt(6.0) * eta / sigma);
  CHECK(phi.slope0 == doctest::Approx(-2.0 * phi_beta(sigma, eta)).epsilon(1e-8));
  CHECK(phi(1.3) == doctest::Approx(phi_closed_form(1.3, sigma, eta)).epsilon(1e-6));
  CHECK_THROWS_AS(solve_phi_shooting(1.0, 1.0, 5.0), Error);
}

TEST_CASE("flat PDE data follow the Riccati solution") {
  const double sigma = std::sqrt(2.0), eta = 1.0;
  const double dx = 0.1;
  for (double c : {0.3, 1.0, 2.5}) {
    const PdeState s0 = make_pde_state(0.0, -2.0, dx, Eigen::VectorXd::Constant(41, c));
    const PdeState s1 = pde_evolve(s0, 1.5, sigma, eta);
    CHECK(s1.t == doctest::Approx(1.5));
    const double exact = 1.0 / (1.0 / c + sigma * sigma * 1.5 / 2.0);
    CHECK((s1.values.array() - exact).abs().maxCoeff() <= 1e-6);
  }
  const PdeState s0 = make_pde_state(1.0, 0.0, dx, Eigen::VectorXd::Constant(21, 2.0 / (sigma * sigma)));
  for (double t : {1.5, 2.0, 4.0}) {
    const PdeState s = pde_evolve(s0, t, sigma, eta);
    CHECK((s.values.array() - 2.0 / (sigma * sigma * t)).abs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("monotone data stay monotone and under the flat envelope") {
  const double sigma = 1.0, eta = 1.0, dx = 0.05;
  const int n = 201;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    const double x = -5.0 + dx * i;
    v[i] = 2.0 / (sigma * sigma) * 0.5 * std::erfc(x);
  }
  const PdeState s0 = make_pde_state(1.0, -5.0, dx, v);
  const double sup = v.maxCoeff();
  for (double t : {1.1, 1.5, 2.0}) {
    const PdeState s = pde_evolve(s0, t, sigma, eta);
    for (int i = 1; i < n; ++i) REQUIRE(s.values[i] <= s.values[i - 1] + 1e-14);
    const double envelope = 1.0 / (1.0 / sup + sigma * sigma * (t - 1.0) / 2.0);
    CHECK(s.values.maxCoeff() <= envelope + 1e-12);
    CHECK(s.values.minCoeff() >= 0.0);
  }
}

TEST_CASE("explicit scheme refuses an unstable step") {
  const PdeState bad = make_pde_state(1.0, 0.0, 0.1, Eigen::VectorXd::Ones(10), 0.011);
  CHECK_THROWS_AS(pde_evolve(bad, 2.0, 1.0, 1.0), Error);
  const PdeState edge = make_pde_state(1.0, 0.0, 0.1, Eigen::VectorXd::Ones(10), 0.01);
  CHECK_NOTHROW(pde_evolve(edge, 1.1, 1.0, 1.0));
}

TEST_CASE("rescaled recursion matches the PDE across scales") {
  const ModelParams m = make_model(double_or_nothing(), rademacher());
  const SpaceTimeTail st = evolve_space_time_tail(m, 1000, 400);
  const CrossScaleReport r125 = cross_scale_check(st, 125, 1.0, 1.0);
  const CrossScaleReport r250 = cross_scale_check(st, 250, 1.0, 1.0);
  const CrossScaleReport r500 = cross_scale_check(st, 500, 1.0, 1.0);
  CHECK(r500.relative_discrepancy <= 0.05);
  CHECK(r500.relative_discrepancy < r250.relative_discrepancy);
  CHECK(r250.relative_discrepancy < r125.relative_discrepancy);
  CHECK(r500.reaction == doctest::Approx(0.5));

  // The coefficient sigma^2 instead of sigma^2/2 fits far worse.
  const CrossScaleReport doubled = cross_scale_check(st, 500, 1.0, 1.0, 1.0);
  CHECK(doubled.relative_discrepancy > 5.0 * r500.relative_discrepancy);

  CHECK_THROWS_AS(cross_scale_check(st, 501, 1.0, 1.0), Error);
  CHECK_THROWS_AS(cross_scale_check(st, 250, std::sqrt(2.0), 1.0), Error);
  const ModelParams lazy = make_model(double_or_nothing(), lazy_step(0.5));
  const SpaceTimeTail other = evolve_space_time_tail(lazy, 100, 200);
  CHECK_THROWS_AS(cross_scale_check(other, 50, 1.0, 1.0), Error);
}
