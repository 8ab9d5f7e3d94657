#include "brw/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>

#include "brw/parallel.hpp"

namespace brw {

namespace {

constexpr std::uint64_t kMartingaleFamily = 0x6d617274ULL;  // "mart"
constexpr std::uint64_t kOvershootFamily = 0x6f766572ULL;   // "over"
constexpr std::uint64_t kLadderPoolFamily = 0x6c616464ULL;  // "ladd"
constexpr std::uint64_t kFkFamily = 0x666b6273ULL;          // "fkbs"

// Products below this are reported as 0.
constexpr double kProductUnderflow = 1e-300;

/// Draws reflected increments -Y. Symmetric +-1 steps read one bit each.
class ReflectedStepper {
 public:
  explicit ReflectedStepper(const StepLaw& step) : sampler_(&step.sampler()) {
    const auto& s = step.support();
    unit_ = s.size() == 2 && s[0].first == -1 && s[1].first == 1 && s[0].second == s[1].second;
  }

  std::int64_t operator()(RngStream& rng) {
    if (!unit_) return -sampler_->sample(rng);
    if (bits_left_ == 0) {
      bits_ = rng();
      bits_left_ = 64;
    }
    const std::int64_t out = (bits_ & 1u) ? 1 : -1;
    bits_ >>= 1;
    --bits_left_;
    return out;
  }

 private:
  const DiscreteSampler* sampler_;
  bool unit_ = false;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
};

std::size_t uniform_index(RngStream& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Renewal sum of pool draws until it reaches `height`; returns the sum.
std::int64_t renewal_passage(std::span<const std::int64_t> pool, std::int64_t height, RngStream& rng) {
  std::int64_t sum = 0;
  while (sum < height) sum += pool[uniform_index(rng, pool.size())];
  return sum;
}

}  // namespace

namespace {

/// Walks until the level or the cap; out.terminal holds the last position
/// either way. Returns false when censored.
bool walk_to_level(const StepLaw& step, std::int64_t start, std::int64_t stop_level, RngStream& rng,
                   std::int64_t step_cap, bool record_path, WalkSummary& out) {
  if (start <= stop_level) throw Error(Errc::OutOfRange, "start must lie above stop_level");
  ReflectedStepper next(step);
  std::int64_t w = start;
  if (record_path) out.path.push_back(w);
  for (std::int64_t n = 1; n <= step_cap; ++n) {
    w += next(rng);
    if (record_path) out.path.push_back(w);
    if (w <= stop_level) {
      out.tau = n;
      out.terminal = w;
      out.overshoot = stop_level - w;
      return true;
    }
  }
  out.tau = step_cap;
  out.terminal = w;
  out.reached = false;
  return false;
}

}  // namespace

WalkSummary reflected_walk(const StepLaw& step, std::int64_t start, std::int64_t stop_level, RngStream& rng,
                           std::int64_t step_cap, bool record_path) {
  WalkSummary out;
  walk_to_level(step, start, stop_level, rng, step_cap, record_path, out);
  return out;
}

std::optional<WalkSummary> try_reflected_walk(const StepLaw& step, std::int64_t start, std::int64_t stop_level,
                                              RngStream& rng, std::int64_t step_cap, bool record_path) {
  WalkSummary out;
  if (!walk_to_level(step, start, stop_level, rng, step_cap, record_path, out)) return std::nullopt;
  return out;
}

WalkSummary reflected_walk_path(const StepLaw& step, std::int64_t start, std::int64_t stop_level, RngStream& rng,
                                std::int64_t step_cap, bool record_path) {
  auto out = try_reflected_walk(step, start, stop_level, rng, step_cap, record_path);
  if (!out) throw Error(Errc::StepCapExceeded, "walk did not reach the level in " + std::to_string(step_cap) + " steps");
  return std::move(*out);
}

// ---------------------------------------------------------------------------

namespace {

/// factors[x] = 1 - H(u(x)) for x = 0..x_max; x <= 0 reads factors[0].
Eigen::VectorXd martingale_factors(const ModelParams& params, const TailFunction& tail) {
  Eigen::VectorXd f(tail.x_max + 1);
  f[0] = 1.0 - big_h_unchecked(params.offspring, 1.0);
  for (std::int64_t x = 1; x <= tail.x_max; ++x) f[x] = 1.0 - big_h_unchecked(params.offspring, tail.values[x]);
  return f;
}

MartingaleSample run_martingale_path(const ModelParams& params, const Eigen::VectorXd& factors, std::int64_t x_max,
                                     std::int64_t start_x, RngStream& rng, std::int64_t step_cap) {
  MartingaleSample s;
  s.start_x = start_x;
  if (start_x <= 0) return s;  // tau = 0: Y = u(start) = 1
  ReflectedStepper next(params.step);
  std::int64_t w = start_x;
  double product = 1.0;
  for (std::int64_t n = 1; n <= step_cap; ++n) {
    w += next(rng);
    if (w > x_max) {
      s.tau = n;
      s.product = product;
      s.terminal = 0.0;
      s.y_value = 0.0;
      s.exited_grid = true;
      return s;
    }
    product *= factors[std::max<std::int64_t>(w, 0)];
    if (w <= 0 || product < kProductUnderflow) {
      if (w > 0) product = 0.0;
      s.tau = n;
      s.product = product;
      s.terminal = 1.0;
      s.y_value = product;
      return s;
    }
  }
  throw Error(Errc::StepCapExceeded, "martingale path did not stop in " + std::to_string(step_cap) + " steps");
}

}  // namespace

MartingaleSample sample_martingale_path(const ModelParams& params, const TailFunction& tail, std::int64_t start_x,
                                        RngStream& rng, std::int64_t step_cap) {
  if (start_x < 0 || start_x > tail.x_max) throw Error(Errc::OutOfRange, "start_x must lie in 0..x_max");
  return run_martingale_path(params, martingale_factors(params, tail), tail.x_max, start_x, rng, step_cap);
}

MartingaleEstimate martingale_optional_stopping_check(const ModelParams& params, const TailFunction& tail,
                                                      std::int64_t start_x, std::int64_t n_paths,
                                                      std::uint64_t seed, int threads, std::int64_t step_cap) {
  if (start_x < 0 || start_x > tail.x_max) throw Error(Errc::OutOfRange, "start_x must lie in 0..x_max");
  if (n_paths < 1) throw Error(Errc::OutOfRange, "n_paths must be at least 1");
  const Eigen::VectorXd factors = martingale_factors(params, tail);
  std::vector<MartingaleSample> samples(static_cast<std::size_t>(n_paths));
  parallel_for(n_paths, threads, [&](std::int64_t i) {
    RngStream rng(seed, derive_stream_id(kMartingaleFamily, static_cast<std::uint64_t>(i)));
    samples[static_cast<std::size_t>(i)] = run_martingale_path(params, factors, tail.x_max, start_x, rng, step_cap);
  });

  MartingaleEstimate out;
  out.start_x = start_x;
  out.paths = n_paths;
  out.seed = seed;
  out.u_start = tail(start_x);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& s : samples) {
    sum += s.y_value;
    sum2 += s.y_value * s.y_value;
    out.min_y = std::min(out.min_y, s.y_value);
    out.max_y = std::max(out.max_y, s.y_value);
    out.exited_grid += s.exited_grid ? 1 : 0;
  }
  const double n = static_cast<double>(n_paths);
  out.estimate = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum2 - n * out.estimate * out.estimate) / (n - 1.0)) : 0.0;
  out.se = std::sqrt(var / n);
  out.z = out.se > 0.0 ? (out.estimate - out.u_start) / out.se : 0.0;
  return out;
}

Fund2Report fund2_identity_check(const ModelParams& params, const TailFunction& tail) {
  Eigen::VectorXd hu(tail.values.size());
  for (Eigen::Index i = 0; i < hu.size(); ++i) hu[i] = h_unchecked(params.offspring, tail.values[i]);
  const double h_left = h_unchecked(params.offspring, tail.left_value);
  hu[0] = h_left;
  const Eigen::VectorXd mean_u = convolve_clamped(params.step, tail.values, tail.left_value);
  const Eigen::VectorXd mean_h = convolve_clamped(params.step, hu, h_left);

  Fund2Report r;
  r.solver_residual = tail.residual;
  for (std::int64_t x = 1; x <= tail.x_max; ++x) {
    const double d = std::abs(mean_u[x] - tail.values[x] - mean_h[x]);
    if (d > r.max_abs) {
      r.max_abs = d;
      r.argmax = x;
    }
  }
  r.holds = r.max_abs <= tail.residual * (1.0 + 1e-6) + 1e-15;
  return r;
}

// ---------------------------------------------------------------------------

OvershootTable overshoot_statistics(const StepLaw& step, const std::vector<std::int64_t>& heights,
                                    std::int64_t n_paths, std::uint64_t seed, const OvershootOptions& options) {
  if (heights.empty()) throw Error(Errc::OutOfRange, "no start heights");
  for (std::size_t i = 0; i < heights.size(); ++i) {
    if (heights[i] < 1) throw Error(Errc::OutOfRange, "start heights must be positive");
    if (i > 0 && heights[i] <= heights[i - 1]) throw Error(Errc::OutOfRange, "start heights must increase");
  }
  if (n_paths < 1) throw Error(Errc::OutOfRange, "n_paths must be at least 1");

  OvershootTable table;
  table.mode = options.mode;
  table.seed = seed;

  std::vector<std::int64_t> pool;
  if (options.mode == OvershootMode::Ladder) {
    if (options.ladder_pool < 1) throw Error(Errc::OutOfRange, "ladder_pool must be at least 1");
    // Descents from 0 to a strict new minimum. One stuck at w >= 0 after
    // step_cap steps still has to fall w + 1, which the renewal sum over the
    // finished descents supplies.
    std::vector<std::pair<std::int64_t, std::int64_t>> stuck;  // (descent, w)
    for (std::int64_t i = 0; i < options.ladder_pool; ++i) {
      RngStream rng(seed, derive_stream_id(kLadderPoolFamily, static_cast<std::uint64_t>(i)));
      WalkSummary walk;
      if (walk_to_level(step, 0, -1, rng, options.ladder_step_cap, false, walk)) pool.push_back(-walk.terminal);
      else stuck.emplace_back(i, walk.terminal);
    }
    if (pool.empty()) throw Error(Errc::StepCapExceeded, "every ladder descent hit the step cap");
    const std::size_t finished = pool.size();
    for (const auto& [i, w] : stuck) {
      RngStream rng(seed, derive_stream_id(kLadderPoolFamily ^ 1u, static_cast<std::uint64_t>(i)));
      // Passing -1 from w lands at -1 - (S - (w + 1)).
      pool.push_back(renewal_passage(std::span(pool.data(), finished), w + 1, rng) - w);
    }
    table.pool_size = static_cast<std::int64_t>(pool.size());
    table.pool_completed = static_cast<std::int64_t>(stuck.size());
  }

  for (std::size_t r = 0; r < heights.size(); ++r) {
    const std::int64_t height = heights[r];
    const std::uint64_t family = derive_stream_id(kOvershootFamily, r);
    std::vector<std::int64_t> values(static_cast<std::size_t>(n_paths), -1);
    parallel_for(n_paths, options.threads, [&](std::int64_t i) {
      RngStream rng(seed, derive_stream_id(family, static_cast<std::uint64_t>(i)));
      if (options.mode == OvershootMode::Ladder) {
        values[static_cast<std::size_t>(i)] = renewal_passage(pool, height, rng) - height;
      } else {
        auto walk = try_reflected_walk(step, height, 0, rng, options.step_cap);
        if (walk) values[static_cast<std::size_t>(i)] = walk->overshoot;
      }
    });
    OvershootRow row;
    row.height = height;
    row.paths = n_paths;
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t v : values) {
      if (v < 0) {
        ++row.censored;
        continue;
      }
      row.sample.push_back(v);
      s1 += static_cast<double>(v);
      s2 += static_cast<double>(v) * static_cast<double>(v);
    }
    const double n = static_cast<double>(row.sample.size());
    if (n > 0) {
      row.mean = s1 / n;
      row.second_moment = s2 / n;
      row.se_mean = n > 1 ? std::sqrt(std::max(0.0, row.second_moment - row.mean * row.mean) / (n - 1.0)) : 0.0;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

LadderSample ladder_decomposition_sample(const StepLaw& step, RngStream& rng, std::int64_t n_ladders,
                                         std::int64_t step_cap) {
  if (n_ladders < 1) throw Error(Errc::OutOfRange, "n_ladders must be at least 1");
  ReflectedStepper next(step);
  LadderSample out;
  std::int64_t w = 0, minimum = 0;
  for (std::int64_t n = 1; n <= step_cap; ++n) {
    w += next(rng);
    if (w < minimum) {
      out.increments.push_back(w - minimum);
      out.epochs.push_back(n);
      minimum = w;
      if (static_cast<std::int64_t>(out.increments.size()) == n_ladders) return out;
    }
  }
  throw Error(Errc::StepCapExceeded, "ladder sampling exceeded " + std::to_string(step_cap) + " steps");
}

// ---------------------------------------------------------------------------

FkEstimate brownian_fk_estimate(const std::function<double(double)>& phi, double y, double sigma, double eta,
                                double dt, std::int64_t n_paths, std::uint64_t seed, const FkOptions& options) {
  if (!(y > 0.0)) throw Error(Errc::OutOfRange, "y must be positive");
  if (!(dt > 0.0 && dt <= 1e-3)) throw Error(Errc::OutOfRange, "dt must lie in (0, 1e-3]");
  if (n_paths < 1) throw Error(Errc::OutOfRange, "n_paths must be at least 1");
  const double rate = 0.5 * sigma * sigma;
  const double log_floor = std::log(options.weight_floor);
  std::vector<double> weights(static_cast<std::size_t>(n_paths));
  std::vector<char> status(static_cast<std::size_t>(n_paths));  // 0 hit, 1 floored, 2 capped

  parallel_for(n_paths, options.threads, [&](std::int64_t i) {
    RngStream rng(seed, derive_stream_id(kFkFamily, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal;
    double b = y / eta, t = 0.0, exponent = 0.0;
    double v = phi(eta * b);
    for (std::int64_t k = 0;; ++k) {
      if (k >= options.step_cap)
        throw Error(Errc::PathBudgetExceeded, "path " + std::to_string(i) + " exceeded the step cap");
      double h = dt;
      if (options.adaptive_far_field) h = std::max(dt, (b / 20.0) * (b / 20.0));
      const double nb = b + std::sqrt(h) * normal(rng);
      if (nb <= 0.0) {
        // Trapezoid over the part of the step before the crossing.
        const double frac = b / (b - nb);
        exponent += rate * 0.5 * frac * h * (v + phi(0.0));
        weights[static_cast<std::size_t>(i)] = std::exp(-exponent);
        return;
      }
      const double nv = phi(eta * nb);
      exponent += rate * 0.5 * h * (v + nv);
      b = nb;
      v = nv;
      t += h;
      if (-exponent < log_floor) {
        status[static_cast<std::size_t>(i)] = 1;
        return;
      }
      if (t >= options.time_cap) {
        weights[static_cast<std::size_t>(i)] = std::exp(-exponent);
        status[static_cast<std::size_t>(i)] = 2;
        return;
      }
    }
  });

  FkEstimate out;
  out.paths = n_paths;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sum += weights[i];
    sum2 += weights[i] * weights[i];
    out.floored += status[i] == 1;
    out.capped += status[i] == 2;
  }
  const double n = static_cast<double>(n_paths);
  out.estimate = sum / n;
  out.se = n > 1 ? std::sqrt(std::max(0.0, (sum2 - n * out.estimate * out.estimate) / (n - 1.0)) / n) : 0.0;
  out.floor_bias = options.weight_floor * static_cast<double>(out.floored) / n;
  out.allowance = 3.5 * out.se + std::sqrt(dt);
  return out;
}

FkEstimate brownian_fk_estimate(const PhiProfile& phi, double y, double dt, std::int64_t n_paths,
                                std::uint64_t seed, const FkOptions& options) {
  return brownian_fk_estimate([&phi](double z) { return phi(z); }, y, phi.sigma, phi.eta, dt, n_paths, seed,
                              options);
}

}  // namespace brw
