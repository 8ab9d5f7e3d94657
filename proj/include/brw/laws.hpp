#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "brw/error.hpp"
#include "brw/rng.hpp"

namespace brw {

/// Walker/Vose alias sampler over the integers offset, offset+1, ... plus a
/// multinomial splitter for batched draws. Immutable after construction.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  DiscreteSampler(std::int64_t offset, const Eigen::VectorXd& probs);

  std::int64_t sample(RngStream& rng) const {
    const double u = rng.uniform() * static_cast<double>(threshold_.size());
    const auto i = static_cast<std::size_t>(u);
    const double frac = u - static_cast<double>(i);
    return offset_ + static_cast<std::int64_t>(frac < threshold_[i] ? i : alias_[i]);
  }

  /// Splits `count` iid draws into per-value tallies and calls emit(value, n)
  /// for every value with n > 0. Exact multinomial law: small counts are drawn
  /// one by one, large ones by conditional binomials over the support.
  template <class Emit>
  void multinomial(std::int64_t count, RngStream& rng, Emit&& emit) const {
    if (count <= 0) return;
    if (count < kBatchThreshold || count * 4 < static_cast<std::int64_t>(support_.size())) {
      for (std::int64_t i = 0; i < count; ++i) emit(sample(rng), std::int64_t{1});
      return;
    }
    std::int64_t remaining = count;
    double mass = 1.0;
    for (std::size_t j = 0; j < support_.size() && remaining > 0; ++j) {
      const auto& [value, p] = support_[j];
      std::int64_t n;
      if (j + 1 == support_.size() || p >= mass) {
        n = remaining;
      } else {
        std::binomial_distribution<std::int64_t> bin(remaining, std::clamp(p / mass, 0.0, 1.0));
        n = bin(rng);
      }
      mass -= p;
      if (n > 0) {
        emit(value, n);
        remaining -= n;
      }
    }
  }

  /// Sum of `count` iid draws.
  std::int64_t sum_of(std::int64_t count, RngStream& rng) const;

  std::int64_t offset() const noexcept { return offset_; }
  const std::vector<std::pair<std::int64_t, double>>& support() const noexcept { return support_; }

 private:
  static constexpr std::int64_t kBatchThreshold = 16;

  std::int64_t offset_ = 0;
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
  std::vector<std::pair<std::int64_t, double>> support_;
};

/// Critical offspring law F_GW = {p_k} on a finite support 0..K.
class OffspringLaw {
 public:
  /// p_k for k = 0..max_offspring().
  const Eigen::VectorXd& probs() const noexcept { return data_->probs; }
  double p(std::int64_t k) const noexcept {
    return k < 0 || k >= data_->probs.size() ? 0.0 : data_->probs[k];
  }
  std::int64_t max_offspring() const noexcept { return data_->probs.size() - 1; }
  double mean() const noexcept { return data_->mean; }
  /// sigma^2 = sum k^2 p_k - 1.
  double variance() const noexcept { return data_->variance; }
  double third_moment() const noexcept { return data_->third_moment; }
  /// Probability mass discarded by truncating an infinite-support law.
  double truncation_error() const noexcept { return data_->truncation_error; }
  const std::string& label() const noexcept { return data_->label; }

  /// tail()[j] = P(X > j); Q(s) = s * sum_j tail_j (1-s)^j.
  const Eigen::VectorXd& tail() const noexcept { return data_->tail; }
  /// tail2()[j] = sum_{i>j} P(X > i); h(s) = (1-m) s + s^2 sum_j tail2_j (1-s)^j.
  const Eigen::VectorXd& tail2() const noexcept { return data_->tail2; }
  const DiscreteSampler& sampler() const noexcept { return data_->sampler; }

 private:
  struct Data {
    Eigen::VectorXd probs, tail, tail2;
    double mean = 1.0, variance = 0.0, third_moment = 0.0, truncation_error = 0.0;
    std::string label;
    DiscreteSampler sampler;
  };
  std::shared_ptr<const Data> data_;

  friend OffspringLaw make_offspring_law(const std::map<std::int64_t, double>&, std::string, double);
};

/// Drift-free step law F_RW = {a_x} on a finite window of integers.
class StepLaw {
 public:
  std::int64_t min_step() const noexcept { return data_->min_step; }
  std::int64_t max_step() const noexcept { return data_->min_step + data_->probs.size() - 1; }
  /// a_x for x = min_step()..max_step(), densely stored.
  const Eigen::VectorXd& probs() const noexcept { return data_->probs; }
  double a(std::int64_t x) const noexcept {
    const std::int64_t i = x - data_->min_step;
    return i < 0 || i >= data_->probs.size() ? 0.0 : data_->probs[i];
  }
  /// P(step >= y).
  double at_least(std::int64_t y) const noexcept {
    const std::int64_t i = y - data_->min_step;
    if (i <= 0) return 1.0;
    if (i >= data_->at_least.size()) return 0.0;
    return data_->at_least[i];
  }
  /// eta^2.
  double variance() const noexcept { return data_->variance; }
  double mean() const noexcept { return data_->mean; }
  /// Tail index the law is meant to represent (infinity for plain finite laws).
  double verified_moment_order() const noexcept { return data_->moment_order; }
  const std::string& label() const noexcept { return data_->label; }
  const DiscreteSampler& sampler() const noexcept { return data_->sampler; }
  /// Nonzero (x, a_x) pairs in increasing x.
  const std::vector<std::pair<std::int64_t, double>>& support() const noexcept {
    return data_->sampler.support();
  }

 private:
  struct Data {
    std::int64_t min_step = 0;
    Eigen::VectorXd probs, at_least;
    double mean = 0.0, variance = 0.0, moment_order = 0.0;
    std::string label;
    DiscreteSampler sampler;
  };
  std::shared_ptr<const Data> data_;

  friend StepLaw make_step_law_dense(std::int64_t, Eigen::VectorXd, std::string, double);
};

/// A validated (offspring, step) pair with the derived constants
/// C = 6 eta^2 / sigma^2 and beta = sigma / (sqrt(6) eta).
struct ModelParams {
  OffspringLaw offspring;
  StepLaw step;
  double c_const = 0.0;
  double beta = 0.0;
};

ModelParams make_model(OffspringLaw offspring, StepLaw step);

/// Validates and renormalizes {k: p_k}. Mass within 1e-6 of one is
/// renormalized; the mean is never adjusted.
OffspringLaw make_offspring_law(const std::map<std::int64_t, double>& probs, std::string label = "table",
                                double truncation_error = 0.0);
StepLaw make_step_law(const std::map<std::int64_t, double>& probs, std::string label = "table");
StepLaw make_step_law_dense(std::int64_t min_step, Eigen::VectorXd probs, std::string label,
                            double moment_order);

/// Symmetric a_x proportional to |x|^-(5-eps) on 1 <= |x| <= cutoff.
StepLaw heavy_tail_step_law(double epsilon, std::int64_t cutoff);

OffspringLaw double_or_nothing();
OffspringLaw geometric_offspring(int k_max = 60);
OffspringLaw poisson_offspring(int k_max = 60);
StepLaw rademacher();
StepLaw lazy_step(double hold);

/// "don", "geom", "poisson", "table:k=p,...".
OffspringLaw parse_offspring_spec(const std::string& spec);
/// "rademacher", "lazy:q=Q", "table:x=p,...", "heavy:eps=E,cutoff=N".
StepLaw parse_step_spec(const std::string& spec);

// ---------------------------------------------------------------------------
// Q, h, H. All three are evaluated through positive Horner sums in t = 1-s,
// so none of them cancels near s = 0.

template <typename Scalar>
Scalar q_unchecked(const OffspringLaw& law, Scalar s) {
  const Eigen::VectorXd& tail = law.tail();
  const Scalar t = Scalar(1) - s;
  Scalar acc(0);
  for (Eigen::Index j = tail.size() - 1; j >= 0; --j) acc = acc * t + Scalar(tail[j]);
  return s * acc;
}

template <typename Scalar>
Scalar h_unchecked(const OffspringLaw& law, Scalar s) {
  const Eigen::VectorXd& tail2 = law.tail2();
  const Scalar t = Scalar(1) - s;
  Scalar acc(0);
  for (Eigen::Index j = tail2.size() - 1; j >= 0; --j) acc = acc * t + Scalar(tail2[j]);
  return s * Scalar(1.0 - law.mean()) + s * s * acc;
}

template <typename Scalar>
Scalar big_h_unchecked(const OffspringLaw& law, Scalar s) {
  if (s == Scalar(0)) return Scalar(0);
  const Eigen::VectorXd& tail2 = law.tail2();
  const Scalar t = Scalar(1) - s;
  Scalar acc(0);
  for (Eigen::Index j = tail2.size() - 1; j >= 0; --j) acc = acc * t + Scalar(tail2[j]);
  return Scalar(1.0 - law.mean()) + s * acc;
}

namespace detail {
inline void check_unit(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw Error(Errc::OutOfRange, "argument must lie in [0,1]");
}
}  // namespace detail

/// Q(s) = 1 - sum p_i (1-s)^i.
inline double q_eval(const OffspringLaw& law, double s) {
  detail::check_unit(s);
  return q_unchecked(law, s);
}
/// h(s) = s - Q(s).
inline double h_eval(const OffspringLaw& law, double s) {
  detail::check_unit(s);
  return h_unchecked(law, s);
}
/// H(s) = h(s)/s, with H(0) = 0.
inline double big_h_eval(const OffspringLaw& law, double s) {
  detail::check_unit(s);
  return big_h_unchecked(law, s);
}

/// Coefficient-wise Q on an array of probabilities.
Eigen::ArrayXd q_apply(const OffspringLaw& law, const Eigen::ArrayXd& s);

inline std::int64_t sample_offspring(const OffspringLaw& law, RngStream& rng) {
  return law.sampler().sample(rng);
}
inline std::int64_t sample_step(const StepLaw& law, RngStream& rng) { return law.sampler().sample(rng); }

}  // namespace brw
