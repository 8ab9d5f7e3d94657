#include "brw/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "brw/gw.hpp"
#include "brw/parallel.hpp"

namespace brw {

namespace {

constexpr std::uint64_t kTailFamily = 0x7461696cULL;  // "tail"

void add_checked(std::int64_t& total, std::int64_t add) {
  if (total > std::numeric_limits<std::int64_t>::max() - add)
    throw Error(Errc::ParticleOverflow, "generation size exceeds 2^63-1");
  total += add;
}

}  // namespace

std::int64_t advance_frontier(const ModelParams& params, Frontier& frontier, Frontier& scratch,
                              RngStream& rng) {
  scratch.clear();
  const DiscreteSampler& steps = params.step.sampler();
  for (const auto& [pos, count] : frontier) {
    steps.multinomial(count, rng, [&](std::int64_t dx, std::int64_t n) { scratch.emplace_back(pos + dx, n); });
  }
  std::sort(scratch.begin(), scratch.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  frontier.clear();
  const DiscreteSampler& kids = params.offspring.sampler();
  std::int64_t total = 0;
  for (std::size_t i = 0; i < scratch.size();) {
    const std::int64_t pos = scratch[i].first;
    std::int64_t arrived = 0;
    for (; i < scratch.size() && scratch[i].first == pos; ++i) add_checked(arrived, scratch[i].second);
    const std::int64_t born = kids.sum_of(arrived, rng);
    if (born > 0) {
      frontier.emplace_back(pos, born);
      add_checked(total, born);
    }
  }
  return total;
}

RunRecord simulate_tree(const ModelParams& params, const SimOptions& options, RngStream& rng) {
  if (options.gen_cap < 1) throw Error(Errc::OutOfRange, "gen_cap must be at least 1");
  RunRecord rec;
  rec.stream_id = rng.stream_id();
  rec.last_gen_max = 0;
  rec.last_gen_count = 1;
  if (options.record_trajectory) {
    rec.gen_maxima.push_back(0);
    rec.gen_counts.push_back(1);
  }
  if (options.stop_level && rec.max_overall >= *options.stop_level) {
    rec.reached_stop_level = true;
    return rec;
  }

  Frontier frontier{{0, 1}};
  Frontier scratch;
  for (std::int64_t n = 1; n <= options.gen_cap; ++n) {
    const std::int64_t total = advance_frontier(params, frontier, scratch, rng);
    rec.extinction_gen = n;
    rec.last_gen_count = total;
    if (total == 0) {
      rec.last_gen_max = kExtinct;
      if (options.record_trajectory) {
        rec.gen_maxima.push_back(kExtinct);
        rec.gen_counts.push_back(0);
      }
      return rec;
    }
    rec.last_gen_max = frontier.back().first;
    rec.max_overall = std::max(rec.max_overall, frontier.back().first);
    rec.min_overall = std::min(rec.min_overall, frontier.front().first);
    if (options.record_trajectory) {
      rec.gen_maxima.push_back(frontier.back().first);
      rec.gen_counts.push_back(total);
    }
    if (options.stop_level && rec.max_overall >= *options.stop_level) {
      rec.reached_stop_level = true;
      return rec;
    }
  }
  rec.censored = true;
  return rec;
}

RunRecord simulate_superposition(const ModelParams& params, std::int64_t n_particles,
                                 const SimOptions& options, const RngStream& rng, int threads) {
  if (n_particles < 1) throw Error(Errc::OutOfRange, "n_particles must be at least 1");
  SimOptions tree_options = options;
  tree_options.record_trajectory = false;

  RunRecord combined;
  combined.stream_id = rng.stream_id();
  combined.extinction_gen = 0;
  combined.last_gen_max = kExtinct;
  combined.attempts = n_particles;

  auto merge = [&combined](const RunRecord& r) {
    combined.max_overall = std::max(combined.max_overall, r.max_overall);
    combined.min_overall = std::min(combined.min_overall, r.min_overall);
    combined.extinction_gen = std::max(combined.extinction_gen, r.extinction_gen);
    combined.censored = combined.censored || r.censored;
    combined.reached_stop_level = combined.reached_stop_level || r.reached_stop_level;
  };

  if (options.stop_level) {
    for (std::int64_t i = 0; i < n_particles; ++i) {
      RngStream stream = rng.child(static_cast<std::uint64_t>(i));
      const RunRecord r = simulate_tree(params, tree_options, stream);
      merge(r);
      if (r.reached_stop_level) {
        combined.attempts = i + 1;
        break;
      }
    }
    return combined;
  }

  std::vector<RunRecord> records(static_cast<std::size_t>(n_particles));
  parallel_for(n_particles, threads, [&](std::int64_t i) {
    RngStream stream = rng.child(static_cast<std::uint64_t>(i));
    records[static_cast<std::size_t>(i)] = simulate_tree(params, tree_options, stream);
  });
  for (const auto& r : records) merge(r);
  return combined;
}

RunRecord simulate_conditioned(const ModelParams& params, std::int64_t n_target, const RngStream& rng,
                               std::int64_t max_attempts, bool record_trajectory) {
  if (n_target < 1) throw Error(Errc::OutOfRange, "n_target must be at least 1");
  SimOptions options;
  options.gen_cap = n_target;
  options.record_trajectory = record_trajectory;
  for (std::int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    RngStream stream = rng.child(static_cast<std::uint64_t>(attempt));
    RunRecord r = simulate_tree(params, options, stream);
    if (r.censored) {
      r.attempts = attempt + 1;
      return r;
    }
  }
  throw Error(Errc::AttemptBudgetExceeded,
              "no tree survived to generation " + std::to_string(n_target) + " in " +
                  std::to_string(max_attempts) + " attempts");
}

std::vector<RunRecord> simulate_trees(const ModelParams& params, std::int64_t count, const SimOptions& options,
                                      std::uint64_t seed, std::uint64_t family, int threads) {
  std::vector<RunRecord> records(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  parallel_for(count, threads, [&](std::int64_t i) {
    RngStream stream(seed, derive_stream_id(family, static_cast<std::uint64_t>(i)));
    records[static_cast<std::size_t>(i)] = simulate_tree(params, options, stream);
  });
  return records;
}

TailEstimate estimate_tail(const ModelParams& params, std::int64_t trees, std::int64_t gen_cap,
                           const std::vector<std::int64_t>& xs, std::uint64_t seed, int threads) {
  if (trees < 1) throw Error(Errc::OutOfRange, "trees must be at least 1");
  SimOptions options;
  options.gen_cap = gen_cap;
  // Only the maximum is needed; keep memory flat by tallying per tree.
  std::vector<std::int64_t> maxima(static_cast<std::size_t>(trees));
  std::vector<char> censored(static_cast<std::size_t>(trees));
  parallel_for(trees, threads, [&](std::int64_t i) {
    RngStream stream(seed, derive_stream_id(kTailFamily, static_cast<std::uint64_t>(i)));
    const RunRecord r = simulate_tree(params, options, stream);
    maxima[static_cast<std::size_t>(i)] = r.max_overall;
    censored[static_cast<std::size_t>(i)] = r.censored ? 1 : 0;
  });

  const double bias = survival_probabilities(params.offspring, gen_cap).q[gen_cap];
  TailEstimate out;
  out.seed = seed;
  for (char c : censored) out.censored += c;
  for (std::int64_t x : xs) {
    TailEstimateRow row;
    row.x = x;
    row.trees = trees;
    row.hits = std::count_if(maxima.begin(), maxima.end(), [x](std::int64_t m) { return m >= x; });
    row.p_hat = static_cast<double>(row.hits) / static_cast<double>(trees);
    row.se = std::sqrt(row.p_hat * (1.0 - row.p_hat) / static_cast<double>(trees));
    row.bias_bound = bias;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace brw
