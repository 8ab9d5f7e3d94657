#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "brw/laws.hpp"
#include "brw/rng.hpp"

namespace brw {

/// q[n] = P{N_n >= 1} = P{zeta > n}, the probability the Galton-Watson
/// process is alive at generation n.
struct SurvivalTable {
  Eigen::VectorXd q;
  double sigma2 = 0.0;
};

/// Iterates q_{n+1} = q_n - h(q_n) from q_0 = 1.
SurvivalTable survival_probabilities(const OffspringLaw& law, std::int64_t n_max);

/// n q[n] sigma^2 / 2, which tends to 1 for a critical law.
Eigen::VectorXd kolmogorov_diagnostic(const SurvivalTable& table);

struct ExtinctionTime {
  std::int64_t generation = 0;  ///< zeta when !censored, gen_cap otherwise
  bool censored = false;
};

/// Simulates generation sizes from one ancestor until the first empty
/// generation, or reports Censored(gen_cap).
ExtinctionTime sample_extinction_time(const OffspringLaw& law, std::int64_t gen_cap, RngStream& rng);

}  // namespace brw
