#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "brw/gw.hpp"
#include "brw/laws.hpp"

namespace brw {

/// u(x) = P{M >= x} on the integers 0..x_max. Positions x <= 0 take
/// left_value (1 for u itself) and positions beyond x_max are clamped to 0.
struct TailFunction {
  /// values[x] for x = 0..x_max; values[0] == left_value.
  Eigen::VectorXd values;
  std::int64_t x_max = 0;
  double left_value = 1.0;
  /// sup_x |u(x) - (Tu)(x)| over 1..x_max after the last sweep.
  double residual = 0.0;
  /// Sup-norm change of the last sweep.
  double last_change = 0.0;
  /// change * rho / (1 - rho) with rho the observed contraction ratio.
  double error_estimate = 0.0;
  std::int64_t iterations = 0;
  std::vector<std::string> warnings;

  double operator()(std::int64_t x) const {
    if (x <= 0) return left_value;
    if (x > x_max) return 0.0;
    return values[x];
  }
};

struct SolveOptions {
  double tol = 1e-12;
  /// 0 selects 50 x_max^2.
  std::int64_t iter_cap = 0;
};

/// out[i] = sum_y a_y g(i - y) for i = 1..N-1 where g(j) = left for j < 0
/// and 0 for j >= N; out[0] = left. Direct summation over the step support.
Eigen::VectorXd convolve_clamped(const StepLaw& step, const Eigen::VectorXd& g, double left,
                                 Eigen::Index first = 1);

/// (Tf)(x) = sum_y a_y Q(f(x-y)) for 1 <= x <= x_max, with f = 1 on x <= 0.
Eigen::VectorXd apply_tail_operator(const ModelParams& params, const Eigen::VectorXd& f);

/// Monotone iteration u^(k+1) = T u^(k) from the indicator of x <= 0, stopped
/// when the sup-norm change drops to tol. Throws IterCapExceeded.
TailFunction solve_all_time_tail(const ModelParams& params, std::int64_t x_max, const SolveOptions& options = {});

/// sup_x |f(x) - (Tf)(x)| on 1..x_max.
double fixed_point_residual(const ModelParams& params, const TailFunction& tail);

/// Q(u) pointwise: the tail for the reproduce-then-disperse ordering. Its
/// left clamp is Q(1) = 1 - p_0.
TailFunction alternate_order_tail(const ModelParams& params, const TailFunction& tail);

/// Directly iterates f -> Q(sum_k a_k f(. - k)) with left clamp Q(1), the
/// reproduce-first equation, as an independent route to Q(u).
TailFunction solve_reproduce_first_tail(const ModelParams& params, std::int64_t x_max,
                                        const SolveOptions& options = {});

/// v_n(x) = P{M_n >= x} on the two-sided grid -x_max..x_max for n = 0..n_max.
/// Left of the grid v_n = q[n], right of it 0.
struct SpaceTimeTail {
  std::int64_t x_max = 0;
  /// slices[n][x + x_max].
  std::vector<Eigen::VectorXd> slices;
  Eigen::VectorXd q;
  double sigma2 = 0.0;
  double eta2 = 0.0;
  std::string offspring_label;
  std::string step_label;
  std::vector<std::string> warnings;

  std::int64_t n_max() const { return static_cast<std::int64_t>(slices.size()) - 1; }
  double operator()(std::int64_t n, std::int64_t x) const {
    if (x < -x_max) return q[n];
    if (x > x_max) return 0.0;
    return slices[static_cast<std::size_t>(n)][x + x_max];
  }
};

/// One Q-then-convolve sweep per generation from v_0 = 1{x <= 0}. Throws
/// GridTooSmall when a left-edge value drifts more than 1e-9 from q[n]
/// (strict) or records a warning (non-strict).
SpaceTimeTail evolve_space_time_tail(const ModelParams& params, std::int64_t n_max, std::int64_t x_max,
                                     bool strict = true);

/// Right-continuous step CDF given by its jump points.
struct StepCdf {
  std::vector<double> x;
  std::vector<double> value;

  /// F(t) = value[i] for x[i] <= t < x[i+1]; 0 left of x[0].
  double operator()(double t) const;
};

/// Conditional law of M_n / sqrt(n) given survival to generation n.
struct ConditionalCdf {
  std::int64_t n = 0;
  double q_n = 0.0;
  /// Jump points m / sqrt(n) and P{M_n <= m | N_n >= 1}.
  StepCdf cdf;
  /// v_n on -x_max..x_max.
  Eigen::VectorXd v;
  std::int64_t x_max = 0;

  /// G_n(x) = 1 - v_n(ceil(x sqrt n)) / q[n].
  double operator()(double x_scaled) const;
};

ConditionalCdf conditional_cdf(const SpaceTimeTail& spacetime, std::int64_t n);

/// 1 - (1 - u(ceil(sqrt(n) x)))^n, the tail of the maximum over n
/// independent trees. Throws GridTooSmall past x_max.
double superposition_tail(const TailFunction& tail, std::int64_t n_particles, double x_scaled);

struct PlateauPoint {
  std::int64_t x = 0;
  double w = 0.0;           ///< x^2 u(x)
  double normalized = 0.0;  ///< w(x) beta^2
};

/// w(x) = x^2 u(x) and w(x) beta^2 for each requested x (all of 1..x_max
/// when xs is empty).
std::vector<PlateauPoint> plateau_scan(const TailFunction& tail, double beta,
                                       const std::vector<std::int64_t>& xs = {});

}  // namespace brw
