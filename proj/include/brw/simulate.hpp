#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "brw/laws.hpp"
#include "brw/rng.hpp"

namespace brw {

/// Occupied sites of one generation as (position, count), sorted by position.
/// Every stored count is >= 1.
using Frontier = std::vector<std::pair<std::int64_t, std::int64_t>>;

/// Sentinel for M_n in an empty generation.
inline constexpr std::int64_t kExtinct = std::numeric_limits<std::int64_t>::min();

struct RunRecord {
  /// M = max_n M_n; M_0 = 0 so this is never negative.
  std::int64_t max_overall = 0;
  /// Leftmost position ever occupied (mirror image of M).
  std::int64_t min_overall = 0;
  /// First empty generation zeta, or the last simulated generation if censored.
  std::int64_t extinction_gen = 0;
  bool censored = false;
  /// Simulation stopped because max_overall reached SimOptions::stop_level.
  bool reached_stop_level = false;
  /// M_n and (N_n) of the last simulated generation; kExtinct / 0 when empty.
  std::int64_t last_gen_max = kExtinct;
  std::int64_t last_gen_count = 0;
  /// Per-generation M_n and N_n, filled when record_trajectory is set.
  std::vector<std::int64_t> gen_maxima;
  std::vector<std::int64_t> gen_counts;
  std::uint64_t stream_id = 0;
  std::int64_t attempts = 1;
};

struct SimOptions {
  std::int64_t gen_cap = 10000;
  bool record_trajectory = false;
  /// Stop as soon as the running maximum reaches this level.
  std::optional<std::int64_t> stop_level;
};

/// One branching random walk from a single particle at the origin. Each
/// generation every particle first steps, then reproduces at its new site;
/// only post-reproduction positions enter M_n.
RunRecord simulate_tree(const ModelParams& params, const SimOptions& options, RngStream& rng);

/// Advances a frontier by one generation in place. Returns N of the new
/// generation.
std::int64_t advance_frontier(const ModelParams& params, Frontier& frontier, Frontier& scratch,
                              RngStream& rng);

/// Maximum over n independent trees from the origin. Tree i draws from
/// rng.child(i), so the result does not depend on `threads`. With a stop
/// level the trees run in index order and the first hit ends the run.
RunRecord simulate_superposition(const ModelParams& params, std::int64_t n_particles,
                                 const SimOptions& options, const RngStream& rng, int threads = 1);

/// Rejection sampler for a tree alive at generation n_target. Attempt j uses
/// rng.child(j). The record is cut at n_target, so it is always censored
/// there and last_gen_max holds M_{n_target}.
RunRecord simulate_conditioned(const ModelParams& params, std::int64_t n_target, const RngStream& rng,
                               std::int64_t max_attempts = 100'000'000, bool record_trajectory = false);

/// Row of a Monte Carlo tail table: P{M >= x} estimated from `trees` runs.
struct TailEstimateRow {
  std::int64_t x = 0;
  std::int64_t hits = 0;
  std::int64_t trees = 0;
  double p_hat = 0.0;
  double se = 0.0;
  /// q[gen_cap] >= P{M >= x, zeta > gen_cap}.
  double bias_bound = 0.0;
};

struct TailEstimate {
  std::vector<TailEstimateRow> rows;
  std::int64_t censored = 0;
  std::uint64_t seed = 0;
};

/// Simulates `trees` independent trees (tree i on stream (seed, i)) and
/// tallies hits M >= x for each x. Integer tallies are identical for any
/// thread count.
TailEstimate estimate_tail(const ModelParams& params, std::int64_t trees, std::int64_t gen_cap,
                           const std::vector<std::int64_t>& xs, std::uint64_t seed, int threads = 1);

/// Records (no trajectories) for trees 0..count-1 of stream family (seed, family).
std::vector<RunRecord> simulate_trees(const ModelParams& params, std::int64_t count, const SimOptions& options,
                                      std::uint64_t seed, std::uint64_t family, int threads = 1);

}  // namespace brw
