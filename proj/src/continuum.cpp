#include "brw/continuum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace brw {

namespace {

using State = Eigen::Vector2d;

/// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Ode {
  double k;  // (sigma / eta)^2
  State operator()(const State& s) const { return State(s[1], k * s[0] * s[0]); }
};

/// Adaptive integrator for the autonomous system; step() advances by at
/// most h_max and reports the accepted step length.
class Dopri5 {
 public:
  Dopri5(Ode f, double tol) : f_(f), tol_(tol) {}

  double step(State& s, double h_max) {
    h_ = std::min(h_, h_max);
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double h = h_;
      const State k1 = f_(s);
      const State k2 = f_(s + h * a21 * k1);
      const State k3 = f_(s + h * (a31 * k1 + a32 * k2));
      const State k4 = f_(s + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const State k5 = f_(s + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const State k6 = f_(s + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const State next = s + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State k7 = f_(next);
      const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double norm = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double scale = tol_ + tol_ * std::max(std::abs(s[i]), std::abs(next[i]));
        norm = std::max(norm, std::abs(err[i]) / scale);
      }
      const double factor = norm > 0.0 ? std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0) : 5.0;
      if (norm <= 1.0) {
        s = next;
        h_ = h * factor;
        return h;
      }
      h_ = h * std::max(factor, 0.1);
    }
    throw Error(Errc::BisectionFailure, "integrator step size collapsed");
  }

 private:
  Ode f_;
  double tol_;
  double h_ = 1e-3;
};

enum class Shot { Steep, Shallow, Unresolved };

/// Steep: phi reaches 0. Shallow: phi' reaches 0 with phi > 0.
Shot classify(const Ode& f, double slope, double tol, double y_limit) {
  Dopri5 rk(f, tol);
  State s(1.0, slope);
  double y = 0.0;
  while (y < y_limit) {
    y += rk.step(s, y_limit - y);
    if (s[0] <= 0.0) return Shot::Steep;
    if (s[1] >= 0.0) return Shot::Shallow;
  }
  return Shot::Unresolved;
}

}  // namespace

double PhiProfile::operator()(double t) const {
  if (t < 0.0) throw Error(Errc::NegativeArgument, "phi is defined for y >= 0");
  const Eigen::Index last = y.size() - 1;
  if (t >= y[last]) {
    const double k = sigma * sigma / (eta * eta);
    const double c = std::sqrt(6.0 / (k * phi[last])) - y[last];
    const double r = t + c;
    return 6.0 / (k * r * r);
  }
  const auto it = std::upper_bound(y.data(), y.data() + y.size(), t);
  const Eigen::Index i = std::max<Eigen::Index>(it - y.data() - 1, 0);
  const double h = y[i + 1] - y[i];
  const double s = (t - y[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * phi[i] + (s3 - 2 * s2 + s) * h * dphi[i] + (-2 * s3 + 3 * s2) * phi[i + 1] +
         (s3 - s2) * h * dphi[i + 1];
}

PhiProfile solve_phi_shooting(double sigma, double eta, double y_max, double tol, std::int64_t grid_points) {
  if (!(sigma > 0.0 && eta > 0.0)) throw Error(Errc::OutOfRange, "sigma and eta must be positive");
  const double scale = std::sqrt(6.0) * eta / sigma;
  if (!(y_max >= 10.0 * scale)) throw Error(Errc::OutOfRange, "y_max must be at least 10 sqrt(6) eta / sigma");
  if (grid_points < 2) throw Error(Errc::OutOfRange, "grid_points must be at least 2");
  const Ode f{sigma * sigma / (eta * eta)};
  // Near the decaying trajectory a slope error d grows like d (y/scale)^6
  // relative to phi, so classification may need to run far past y_max.
  const double y_limit = 1e4 * scale;

  double hi = 0.0;  // shallow: phi'' > 0 turns phi upward at once
  double lo = -1.0 / scale;
  int steps = 0;
  while (classify(f, lo, tol, y_limit) != Shot::Steep) {
    lo *= 2.0;
    if (++steps > 60) throw Error(Errc::BisectionFailure, "no steep initial slope found");
  }
  if (classify(f, hi, tol, y_limit) != Shot::Shallow)
    throw Error(Errc::BisectionFailure, "zero initial slope did not turn upward");

  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lo)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Shot shot = classify(f, mid, tol, y_limit);
    if (shot == Shot::Unresolved) {
      lo = hi = mid;
      break;
    }
    (shot == Shot::Steep ? lo : hi) = mid;
    if (++steps > 400) throw Error(Errc::BisectionFailure, "bisection did not terminate");
  }

  PhiProfile out;
  out.sigma = sigma;
  out.eta = eta;
  out.bisection_steps = steps;
  out.slope0 = 0.5 * (lo + hi);
  out.y = Eigen::VectorXd::LinSpaced(grid_points, 0.0, y_max);
  out.phi.resize(grid_points);
  out.dphi.resize(grid_points);
  Dopri5 rk(f, tol);
  State s(1.0, out.slope0);
  out.phi[0] = s[0];
  out.dphi[0] = s[1];
  double y = 0.0;
  for (Eigen::Index i = 1; i < grid_points; ++i) {
    while (y < out.y[i]) {
      const double remaining = out.y[i] - y;
      const double h = rk.step(s, remaining);
      y = h == remaining ? out.y[i] : y + h;
    }
    out.phi[i] = s[0];
    out.dphi[i] = s[1];
  }
  for (Eigen::Index i = 0; i < grid_points; ++i) {
    if (!(out.phi[i] > 0.0 && out.phi[i] <= 1.0 + 1e-12 && out.dphi[i] < 0.0))
      throw Error(Errc::BisectionFailure, "profile leaves (0, 1] or stops decreasing before y_max");
  }
  return out;
}

// ---------------------------------------------------------------------------

PdeState make_pde_state(double t, double x0, double dx, Eigen::VectorXd values, double dt) {
  if (!(dx > 0.0)) throw Error(Errc::OutOfRange, "dx must be positive");
  PdeState s;
  s.t = t;
  s.dx = dx;
  s.dt = dt;
  s.x = Eigen::VectorXd::LinSpaced(values.size(), x0, x0 + dx * static_cast<double>(values.size() - 1));
  s.values = std::move(values);
  return s;
}

PdeState pde_evolve(const PdeState& initial, double t_final, double sigma, double eta,
                    std::optional<double> reaction) {
  if (!(t_final > initial.t)) throw Error(Errc::OutOfRange, "t_final must exceed the initial time");
  if (initial.values.size() < 2) throw Error(Errc::OutOfRange, "grid needs at least 2 points");
  const double dx = initial.dx;
  const double bound = dx * dx / (eta * eta);
  const double dt_req = initial.dt > 0.0 ? initial.dt : 0.5 * bound;
  if (dt_req > bound)
    throw Error(Errc::StabilityViolation, "dt exceeds dx^2/eta^2 = " + std::to_string(bound));
  const double c = reaction.value_or(0.5 * sigma * sigma);
  const double d = 0.5 * eta * eta / (dx * dx);
  const auto steps = static_cast<std::int64_t>(std::ceil((t_final - initial.t) / dt_req - 1e-9));
  const double dt = (t_final - initial.t) / static_cast<double>(steps);

  const Eigen::Index n = initial.values.size();
  auto rhs = [&](const Eigen::VectorXd& u, Eigen::VectorXd& out) {
    out.resize(n);
    out[0] = d * (u[1] - u[0]) - c * u[0] * u[0];
    for (Eigen::Index i = 1; i + 1 < n; ++i) out[i] = d * (u[i + 1] - 2.0 * u[i] + u[i - 1]) - c * u[i] * u[i];
    out[n - 1] = d * (u[n - 2] - u[n - 1]) - c * u[n - 1] * u[n - 1];
  };

  PdeState s = initial;
  s.dt = dt;
  Eigen::VectorXd k(n), u1(n), u2(n);
  for (std::int64_t step = 0; step < steps; ++step) {
    rhs(s.values, k);
    u1 = s.values + dt * k;
    rhs(u1, k);
    u2 = 0.75 * s.values + 0.25 * (u1 + dt * k);
    rhs(u2, k);
    s.values = (1.0 / 3.0) * s.values + (2.0 / 3.0) * (u2 + dt * k);
  }
  s.t = t_final;
  return s;
}

CrossScaleReport cross_scale_check(const SpaceTimeTail& st, std::int64_t n, double sigma, double eta,
                                   std::optional<double> reaction) {
  if (n < 1) throw Error(Errc::OutOfRange, "n must be at least 1");
  if (2 * n > st.n_max())
    throw Error(Errc::GridMismatch, "slice " + std::to_string(2 * n) + " not available");
  if (std::abs(sigma * sigma - st.sigma2) > 1e-9 * std::max(1.0, st.sigma2) ||
      std::abs(eta * eta - st.eta2) > 1e-9 * std::max(1.0, st.eta2))
    throw Error(Errc::GridMismatch, "sigma, eta do not match the laws behind the slices (" + st.offspring_label +
                                        ", " + st.step_label + ")");
  const double root = std::sqrt(static_cast<double>(n));
  const double scale = static_cast<double>(n);
  const Eigen::VectorXd start = scale * st.slices[static_cast<std::size_t>(n)];
  PdeState initial = make_pde_state(1.0, -static_cast<double>(st.x_max) / root, 1.0 / root, start);
  const PdeState evolved = pde_evolve(initial, 2.0, sigma, eta, reaction);

  CrossScaleReport r;
  r.n = n;
  r.reaction = reaction.value_or(0.5 * sigma * sigma);
  r.x = evolved.x;
  r.value_recursion = scale * st.slices[static_cast<std::size_t>(2 * n)];
  r.value_pde = evolved.values;
  r.diff = r.value_pde - r.value_recursion;
  r.sup_discrepancy = r.diff.cwiseAbs().maxCoeff();
  r.relative_discrepancy = r.sup_discrepancy / r.value_recursion.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace brw
