#include "brw/gw.hpp"

namespace brw {

SurvivalTable survival_probabilities(const OffspringLaw& law, std::int64_t n_max) {
  if (n_max < 1) throw Error(Errc::OutOfRange, "n_max must be at least 1");
  SurvivalTable table;
  table.sigma2 = law.variance();
  table.q.resize(n_max + 1);
  double q = 1.0;
  table.q[0] = q;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    // 1 - f(1 - q) = Q(q) = q - h(q)
    q -= h_unchecked(law, q);
    table.q[n] = q;
  }
  return table;
}

Eigen::VectorXd kolmogorov_diagnostic(const SurvivalTable& table) {
  const Eigen::Index n = table.q.size();
  const Eigen::ArrayXd gens = Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
  return (gens * table.q.array() * (0.5 * table.sigma2)).matrix();
}

ExtinctionTime sample_extinction_time(const OffspringLaw& law, std::int64_t gen_cap, RngStream& rng) {
  if (gen_cap < 1) throw Error(Errc::OutOfRange, "gen_cap must be at least 1");
  std::int64_t population = 1;
  for (std::int64_t n = 1; n <= gen_cap; ++n) {
    population = law.sampler().sum_of(population, rng);
    if (population == 0) return {n, false};
  }
  return {gen_cap, true};
}

}  // namespace brw
