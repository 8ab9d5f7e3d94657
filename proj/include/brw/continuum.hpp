#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <optional>

#include "brw/error.hpp"
#include "brw/lattice.hpp"

namespace brw {

/// beta = sigma / (sqrt(6) eta).
template <class Scalar>
Scalar phi_beta(Scalar sigma, Scalar eta) {
  using std::sqrt;
  return sigma / (sqrt(Scalar(6)) * eta);
}

/// (beta y + 1)^-2. Throws NegativeArgument for y < 0.
template <class Scalar>
Scalar phi_closed_form(Scalar y, Scalar sigma, Scalar eta) {
  if (y < Scalar(0)) throw Error(Errc::NegativeArgument, "phi is defined for y >= 0");
  const Scalar r = phi_beta(sigma, eta) * y + Scalar(1);
  return Scalar(1) / (r * r);
}

/// phi'' = 6 beta^2 (beta y + 1)^-4.
template <class Scalar>
Scalar phi_closed_form_d2(Scalar y, Scalar sigma, Scalar eta) {
  const Scalar beta = phi_beta(sigma, eta);
  const Scalar r = beta * y + Scalar(1);
  return Scalar(6) * beta * beta / (r * r * r * r);
}

struct PhiProfile {
  Eigen::VectorXd y;
  Eigen::VectorXd phi;
  Eigen::VectorXd dphi;
  double slope0 = 0.0;
  double sigma = 1.0;
  double eta = 1.0;
  int bisection_steps = 0;

  /// Cubic Hermite interpolation on the grid. Past the last node the
  /// decaying solution 6 eta^2 / (sigma^2 (y + c)^2) of the same ODE is
  /// matched to the endpoint value.
  double operator()(double y) const;
};

/// Shooting for phi'' = (sigma/eta)^2 phi^2, phi(0) = 1, phi decaying: the
/// initial slope is bisected between trajectories that cross zero and
/// trajectories that turn upward. Integration is an adaptive Dormand-Prince
/// 5(4) pair with local error tol. Throws BisectionFailure.
PhiProfile solve_phi_shooting(double sigma, double eta, double y_max, double tol = 1e-12,
                              std::int64_t grid_points = 2001);

struct PdeState {
  double t = 1.0;
  Eigen::VectorXd x;
  Eigen::VectorXd values;
  double dx = 0.0;
  /// 0 selects dx^2 / (2 eta^2).
  double dt = 0.0;
};

/// Uniform grid x0 + i dx, i = 0..n-1.
PdeState make_pde_state(double t, double x0, double dx, Eigen::VectorXd values, double dt = 0.0);

/// phi_t = (eta^2/2) phi_xx - c phi^2 with c = sigma^2/2 unless given, by
/// three-stage SSP Runge-Kutta in time and centred differences in space.
/// Boundary values are extended as constants. Throws StabilityViolation
/// when dt > dx^2 / eta^2.
PdeState pde_evolve(const PdeState& initial, double t_final, double sigma, double eta,
                    std::optional<double> reaction = std::nullopt);

struct CrossScaleReport {
  std::int64_t n = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd value_recursion;  ///< n v_{2n}(x sqrt n)
  Eigen::VectorXd value_pde;        ///< evolved from n v_n(x sqrt n)
  Eigen::VectorXd diff;
  double sup_discrepancy = 0.0;
  double relative_discrepancy = 0.0;  ///< sup |diff| / sup |value_recursion|
  double reaction = 0.0;
};

/// Evolves Phi(1, m/sqrt n) = n v_n(m) to t = 2 on the lattice points and
/// compares with n v_{2n}(m). Throws GridMismatch when sigma, eta disagree
/// with the laws behind `spacetime` or slice 2n is missing.
CrossScaleReport cross_scale_check(const SpaceTimeTail& spacetime, std::int64_t n, double sigma, double eta,
                                   std::optional<double> reaction = std::nullopt);

}  // namespace brw
