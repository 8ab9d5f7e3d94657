#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "brw/continuum.hpp"
#include "brw/lattice.hpp"
#include "brw/laws.hpp"
#include "brw/rng.hpp"

namespace brw {

/// First passage of the reflected walk W_{n+1} = W_n - Y_n (Y_n ~ a) to
/// (-inf, stop_level].
struct WalkSummary {
  std::int64_t tau = 0;
  std::int64_t terminal = 0;
  /// stop_level - terminal >= 0.
  std::int64_t overshoot = 0;
  /// False when step_cap steps passed first; tau and terminal then describe
  /// the last position and overshoot is 0.
  bool reached = true;
  std::vector<std::int64_t> path;
};

/// Walks until the level or step_cap, whichever comes first.
WalkSummary reflected_walk(const StepLaw& step, std::int64_t start, std::int64_t stop_level, RngStream& rng,
                           std::int64_t step_cap, bool record_path = false);

/// Returns nullopt when step_cap steps pass without reaching the level.
std::optional<WalkSummary> try_reflected_walk(const StepLaw& step, std::int64_t start, std::int64_t stop_level,
                                              RngStream& rng, std::int64_t step_cap, bool record_path = false);

/// As try_reflected_walk but throws StepCapExceeded on censoring. Requires
/// start > stop_level.
WalkSummary reflected_walk_path(const StepLaw& step, std::int64_t start, std::int64_t stop_level, RngStream& rng,
                                std::int64_t step_cap = 100'000'000, bool record_path = false);

struct MartingaleSample {
  std::int64_t start_x = 0;
  std::int64_t stop_level = 0;
  std::int64_t tau = 0;
  /// prod_{j=1}^{tau} (1 - H(u(W_j))).
  double product = 1.0;
  /// u(W_tau); 1 at the level, 0 after leaving the grid upward.
  double terminal = 1.0;
  double y_value = 1.0;
  bool exited_grid = false;
};

/// One path of Y_tau. The path also stops when it first exceeds x_max
/// (where the truncated u vanishes) or when the product underflows.
MartingaleSample sample_martingale_path(const ModelParams& params, const TailFunction& tail, std::int64_t start_x,
                                        RngStream& rng, std::int64_t step_cap = 100'000'000);

struct MartingaleEstimate {
  std::int64_t start_x = 0;
  std::int64_t paths = 0;
  double estimate = 0.0;
  double se = 0.0;
  /// Solver value u(start_x).
  double u_start = 0.0;
  /// (estimate - u_start) / se; 0 when se == 0.
  double z = 0.0;
  double min_y = 1.0;
  double max_y = 0.0;
  std::int64_t exited_grid = 0;
  std::uint64_t seed = 0;
};

/// Mean of Y_tau over n_paths paths; path i uses stream (seed, family, i).
MartingaleEstimate martingale_optional_stopping_check(const ModelParams& params, const TailFunction& tail,
                                                      std::int64_t start_x, std::int64_t n_paths,
                                                      std::uint64_t seed, int threads = 1,
                                                      std::int64_t step_cap = 100'000'000);

struct Fund2Report {
  /// max_x |sum_k a_k u(x-k) - u(x) - sum_k a_k h(u(x-k))| over 1..x_max.
  double max_abs = 0.0;
  std::int64_t argmax = 0;
  double solver_residual = 0.0;
  bool holds = false;
};

/// One-step identity behind the martingale property, evaluated through h
/// rather than Q so it does not reuse the solver's sweep.
Fund2Report fund2_identity_check(const ModelParams& params, const TailFunction& tail);

enum class OvershootMode { Direct, Ladder };

struct OvershootOptions {
  OvershootMode mode = OvershootMode::Ladder;
  /// Per-walk cap in Direct mode.
  std::int64_t step_cap = 1'000'000;
  std::int64_t ladder_pool = 200'000;
  /// Per-descent cap while building the pool.
  std::int64_t ladder_step_cap = 100'000;
  int threads = 1;
};

struct OvershootRow {
  std::int64_t height = 0;
  std::int64_t paths = 0;
  std::int64_t censored = 0;
  double mean = 0.0;
  double second_moment = 0.0;
  double se_mean = 0.0;
  /// Uncensored overshoots in path order.
  std::vector<std::int64_t> sample;
};

struct OvershootTable {
  OvershootMode mode = OvershootMode::Ladder;
  std::vector<OvershootRow> rows;
  std::int64_t pool_size = 0;
  /// Pool descents that hit step_cap and were completed by renewal.
  std::int64_t pool_completed = 0;
  std::uint64_t seed = 0;
};

/// Overshoot |W_tau| at level 0 from each start height. Ladder mode draws
/// strict descending ladder heights from a pool of simulated descents and
/// runs the renewal sum up to the height; Direct mode walks every path.
OvershootTable overshoot_statistics(const StepLaw& step, const std::vector<std::int64_t>& heights,
                                    std::int64_t n_paths, std::uint64_t seed, const OvershootOptions& options = {});

struct LadderSample {
  /// Z_i = (new minimum) - (previous minimum) < 0.
  std::vector<std::int64_t> increments;
  /// Epochs T_i, strictly increasing.
  std::vector<std::int64_t> epochs;
};

/// Strict descending ladder variables of a reflected walk started at 0.
LadderSample ladder_decomposition_sample(const StepLaw& step, RngStream& rng, std::int64_t n_ladders,
                                         std::int64_t step_cap = 100'000'000);

struct FkOptions {
  /// Paths whose weight drops below this contribute 0.
  double weight_floor = 1e-4;
  /// Paths alive at this time contribute their current weight.
  double time_cap = 1e8;
  /// Step length max(dt, (B/20)^2) away from 0.
  bool adaptive_far_field = true;
  std::int64_t step_cap = 100'000'000;
  int threads = 1;
};

struct FkEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t paths = 0;
  std::int64_t floored = 0;
  std::int64_t capped = 0;
  /// weight_floor * floored / paths: the largest downward bias from the floor.
  double floor_bias = 0.0;
  double allowance = 0.0;  ///< 3.5 se + sqrt(dt)
};

/// E exp{-(sigma^2/2) int_0^tau phi(eta B_t) dt} for Brownian B from y/eta,
/// tau the first hitting time of 0, by Euler steps of size dt. Throws
/// PathBudgetExceeded when one path needs more than step_cap steps.
FkEstimate brownian_fk_estimate(const std::function<double(double)>& phi, double y, double sigma, double eta,
                                double dt, std::int64_t n_paths, std::uint64_t seed, const FkOptions& options = {});

FkEstimate brownian_fk_estimate(const PhiProfile& phi, double y, double dt, std::int64_t n_paths,
                                std::uint64_t seed, const FkOptions& options = {});

}  // namespace brw
