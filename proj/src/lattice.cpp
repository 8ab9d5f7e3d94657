#include "brw/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace brw {

namespace {

// Monotonicity checks allow for a few ulps of summation noise.
constexpr double kMonotoneSlack = 1e-14;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Eigen::VectorXd q_on_grid(const OffspringLaw& law, const Eigen::VectorXd& f) {
  Eigen::VectorXd out(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) out[i] = q_unchecked(law, f[i]);
  return out;
}

/// Shared driver for the two monotone iterations: `sweep` maps the current
/// grid (index 0 = clamp) to the next one.
template <class Sweep>
TailFunction iterate_monotone(std::int64_t x_max, double left, const SolveOptions& options, Sweep&& sweep) {
  if (x_max < 1) throw Error(Errc::OutOfRange, "x_max must be at least 1");
  if (!(options.tol >= 1e-14)) throw Error(Errc::OutOfRange, "tol must be at least 1e-14");
  const std::int64_t cap = options.iter_cap > 0 ? options.iter_cap : 50 * x_max * x_max;

  TailFunction tail;
  tail.x_max = x_max;
  tail.left_value = left;
  tail.values = Eigen::VectorXd::Zero(x_max + 1);
  tail.values[0] = left;

  Eigen::VectorXd next;
  double change = 1.0, previous_change = 0.0;
  bool monotone_in_k = true, monotone_in_x = true;
  std::int64_t k = 0;
  while (k < cap) {
    next = sweep(tail.values);
    ++k;
    const Eigen::VectorXd delta = next - tail.values;
    monotone_in_k = monotone_in_k && delta.minCoeff() >= -kMonotoneSlack;
    for (std::int64_t x = 1; x <= x_max && monotone_in_x; ++x)
      monotone_in_x = next[x] <= next[x - 1] + kMonotoneSlack;
    previous_change = change;
    change = delta.cwiseAbs().maxCoeff();
    tail.values.swap(next);
    if (change <= options.tol) break;
  }
  tail.iterations = k;
  tail.last_change = change;
  const double rho = previous_change > 0.0 ? change / previous_change : 0.0;
  tail.error_estimate = rho < 1.0 ? change * rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
  tail.residual = (sweep(tail.values) - tail.values).tail(x_max).cwiseAbs().maxCoeff();

  if (!monotone_in_k) tail.warnings.push_back("iterates were not monotone in k");
  if (!monotone_in_x) tail.warnings.push_back("iterates were not monotone in x");
  if (change > options.tol) {
    throw Error(Errc::IterCapExceeded, "no convergence after " + std::to_string(k) +
                                           " sweeps; residual " + format_double(tail.residual));
  }
  if (tail.values[x_max] > 10.0 * options.tol) {
    tail.warnings.push_back("GridTooSmall: u(x_max) = " + format_double(tail.values[x_max]) +
                            " exceeds 10*tol; the right clamp biases values near x_max");
  }
  return tail;
}

}  // namespace

Eigen::VectorXd convolve_clamped(const StepLaw& step, const Eigen::VectorXd& g, double left, Eigen::Index first) {
  const Eigen::Index n = g.size();
  const std::int64_t y_min = step.min_step();
  const std::int64_t y_max = step.max_step();
  // reversed[t] = a_{y_max - t}, so a_{i-j} = reversed[j - i + y_max] runs
  // forward in j and each output is one contiguous dot product.
  const Eigen::VectorXd reversed = step.probs().reverse();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < first && i < n; ++i) out[i] = left;
  for (Eigen::Index i = first; i < n; ++i) {
    // j = i - y ranges over [i - y_max, i - y_min]; j < 0 reads the clamp.
    double sum = left * step.at_least(static_cast<std::int64_t>(i) + 1);
    const std::int64_t j_lo = std::max<std::int64_t>(i - y_max, 0);
    const std::int64_t j_hi = std::min<std::int64_t>(i - y_min, n - 1);
    if (j_hi >= j_lo) {
      const Eigen::Index len = j_hi - j_lo + 1;
      sum += reversed.segment(j_lo - i + y_max, len).dot(g.segment(j_lo, len));
    }
    out[i] = sum;
  }
  return out;
}

Eigen::VectorXd apply_tail_operator(const ModelParams& params, const Eigen::VectorXd& f) {
  Eigen::VectorXd g = q_on_grid(params.offspring, f);
  const double q_one = q_unchecked(params.offspring, 1.0);
  g[0] = q_one;
  Eigen::VectorXd out = convolve_clamped(params.step, g, q_one);
  out[0] = 1.0;
  return out;
}

TailFunction solve_all_time_tail(const ModelParams& params, std::int64_t x_max, const SolveOptions& options) {
  return iterate_monotone(x_max, 1.0, options,
                          [&params](const Eigen::VectorXd& f) { return apply_tail_operator(params, f); });
}

double fixed_point_residual(const ModelParams& params, const TailFunction& tail) {
  return (apply_tail_operator(params, tail.values) - tail.values).tail(tail.x_max).cwiseAbs().maxCoeff();
}

TailFunction alternate_order_tail(const ModelParams& params, const TailFunction& tail) {
  TailFunction out = tail;
  out.warnings.clear();
  out.left_value = q_unchecked(params.offspring, tail.left_value);
  out.values = q_on_grid(params.offspring, tail.values);
  out.values[0] = out.left_value;
  return out;
}

TailFunction solve_reproduce_first_tail(const ModelParams& params, std::int64_t x_max,
                                        const SolveOptions& options) {
  const double q_one = q_unchecked(params.offspring, 1.0);
  return iterate_monotone(x_max, q_one, options, [&params, q_one](const Eigen::VectorXd& f) {
    Eigen::VectorXd mixed = convolve_clamped(params.step, f, q_one);
    Eigen::VectorXd out = q_on_grid(params.offspring, mixed);
    out[0] = q_one;
    return out;
  });
}

// ---------------------------------------------------------------------------

SpaceTimeTail evolve_space_time_tail(const ModelParams& params, std::int64_t n_max, std::int64_t x_max,
                                     bool strict) {
  if (n_max < 1) throw Error(Errc::OutOfRange, "n_max must be at least 1");
  if (x_max < 1) throw Error(Errc::OutOfRange, "x_max must be at least 1");
  SpaceTimeTail st;
  st.x_max = x_max;
  st.q = survival_probabilities(params.offspring, n_max).q;
  st.sigma2 = params.offspring.variance();
  st.eta2 = params.step.variance();
  st.offspring_label = params.offspring.label();
  st.step_label = params.step.label();

  const Eigen::Index width = 2 * x_max + 1;
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(width);
  v0.head(x_max + 1).setOnes();
  st.slices.reserve(static_cast<std::size_t>(n_max + 1));
  st.slices.push_back(std::move(v0));

  double worst_edge = 0.0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const Eigen::VectorXd g = q_on_grid(params.offspring, st.slices.back());
    // Q(q[n-1]) = q[n] is the clamp left of the grid.
    st.slices.push_back(convolve_clamped(params.step, g, st.q[n], 0));
    worst_edge = std::max(worst_edge, std::abs(st.slices.back()[0] - st.q[n]));
  }
  if (worst_edge > 1e-9) {
    const std::string msg = "left edge deviates from q[n] by " + format_double(worst_edge) +
                            "; widen x_max beyond " + std::to_string(x_max);
    if (strict) throw Error(Errc::GridTooSmall, msg);
    st.warnings.push_back("GridTooSmall: " + msg);
  }
  return st;
}

double StepCdf::operator()(double t) const {
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  if (it == x.begin()) return 0.0;
  return value[static_cast<std::size_t>(it - x.begin() - 1)];
}

ConditionalCdf conditional_cdf(const SpaceTimeTail& st, std::int64_t n) {
  if (n < 1 || n > st.n_max()) throw Error(Errc::OutOfRange, "slice " + std::to_string(n) + " not available");
  ConditionalCdf out;
  out.n = n;
  out.q_n = st.q[n];
  if (!(out.q_n > 0.0)) throw Error(Errc::OutOfRange, "q[n] must be positive");
  out.v = st.slices[static_cast<std::size_t>(n)];
  out.x_max = st.x_max;
  const double root = std::sqrt(static_cast<double>(n));
  for (std::int64_t m = -st.x_max - 1; m <= st.x_max; ++m) {
    out.cdf.x.push_back(static_cast<double>(m) / root);
    out.cdf.value.push_back(1.0 - st(n, m + 1) / out.q_n);
  }
  return out;
}

double ConditionalCdf::operator()(double x_scaled) const {
  const auto m = static_cast<std::int64_t>(std::ceil(x_scaled * std::sqrt(static_cast<double>(n))));
  double vn;
  if (m < -x_max) vn = q_n;
  else if (m > x_max) vn = 0.0;
  else vn = v[m + x_max];
  return 1.0 - vn / q_n;
}

double superposition_tail(const TailFunction& tail, std::int64_t n_particles, double x_scaled) {
  if (n_particles < 1) throw Error(Errc::OutOfRange, "n_particles must be at least 1");
  const auto level =
      static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(n_particles)) * x_scaled));
  if (level > tail.x_max)
    throw Error(Errc::GridTooSmall, "level " + std::to_string(level) + " lies beyond x_max");
  const double u = tail(level);
  if (u >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n_particles) * std::log1p(-u));
}

std::vector<PlateauPoint> plateau_scan(const TailFunction& tail, double beta, const std::vector<std::int64_t>& xs) {
  std::vector<std::int64_t> points = xs;
  if (points.empty())
    for (std::int64_t x = 1; x <= tail.x_max; ++x) points.push_back(x);
  std::vector<PlateauPoint> out;
  out.reserve(points.size());
  for (std::int64_t x : points) {
    if (x < 1 || x > tail.x_max) throw Error(Errc::OutOfRange, "plateau point outside 1..x_max");
    const double w = static_cast<double>(x) * static_cast<double>(x) * tail(x);
    out.push_back({x, w, w * beta * beta});
  }
  return out;
}

}  // namespace brw
